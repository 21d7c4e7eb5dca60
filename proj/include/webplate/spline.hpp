#pragma once

#include "webplate/jet.hpp"

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace webplate {

inline constexpr int kMaxDegree = 9;

/// Uniform knot layout: knot j sits at origin + j * spacing; b_k lives on [knot_k, knot_{k+p+1}].
struct SplineSpec {
    int degree = 3;
    double spacing = 1.0;
    double origin = 0.0;

    void validate() const {
        if (degree < 1 || degree > kMaxDegree) throw Error("spline degree out of range");
        if (!(spacing > 0.0)) throw Error("spline spacing must be positive");
    }
    [[nodiscard]] double knot(int j) const { return origin + j * spacing; }
};

namespace detail {

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Triangular Cox-de Boor table for the cell fraction t in [0,1).
/// table[d][j] = N_d(t + d - j), j = 0..d.
struct CoxDeBoorTable {
    std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> n{};

    CoxDeBoorTable(int p, double t) {
        n[0][0] = 1.0;
        for (int d = 1; d <= p; ++d) {
            for (int j = 0; j <= d; ++j) {
                const double left = j >= 1 ? (t + d - j) * n[d - 1][j - 1] : 0.0;
                const double right = j <= d - 1 ? (j + 1 - t) * n[d - 1][j] : 0.0;
                n[d][j] = (left + right) / d;
            }
        }
    }

    /// q-th derivative (in knot units) of the function that sits at slot j of degree p.
    [[nodiscard]] double derivative(int p, int j, int q) const {
        if (q == 0) return n[p][j];
        double s = 0.0;
        const int d = p - q;
        for (int m = 0; m <= q; ++m) {
            const int jj = j + m - q;
            if (jj < 0 || jj > d) continue;
            s += ((m & 1) ? -1.0 : 1.0) * binomial(q, m) * n[d][jj];
        }
        return s;
    }
};

}  // namespace detail

/// Values and derivatives (orders 0..nd) of all p+1 splines that are nonzero at x.
/// first is the index of the function stored in slot 0.
struct LocalBasis1D {
    int first = 0;
    int count = 0;
    std::array<std::array<double, kMaxDegree + 1>, 4> d{};
};

/// cell >= 0 forces the polynomial piece of that knot interval.
inline LocalBasis1D local_basis(const SplineSpec& spec, double x, int nd, int forced_cell = -1) {
    const int p = spec.degree;
    const double u = (x - spec.origin) / spec.spacing;
    const double cell = forced_cell >= 0 ? static_cast<double>(forced_cell) : std::floor(u);
    const double t = u - cell;
    detail::CoxDeBoorTable table(p, t);
    LocalBasis1D out;
    out.first = static_cast<int>(cell) - p;
    out.count = p + 1;
    double scale = 1.0;
    for (int q = 0; q <= nd; ++q) {
        for (int j = 0; j <= p; ++j) out.d[q][j] = q > p ? 0.0 : table.derivative(p, j, q) * scale;
        scale /= spec.spacing;
    }
    return out;
}

/// d^q/dx^q of b_index at x; exactly zero outside the support.
inline double bspline_eval(const SplineSpec& spec, int index, double x, int deriv_order) {
    spec.validate();
    if (deriv_order > spec.degree) throw Error("derivative order exceeds degree");
    if (deriv_order < 0 || deriv_order > 3) throw Error("derivative order must be in 0..3");
    const int p = spec.degree;
    const double u = (x - spec.origin) / spec.spacing;
    const double cell = std::floor(u);
    const long j = static_cast<long>(index) - static_cast<long>(cell) + p;
    if (j < 0 || j > p) return 0.0;
    detail::CoxDeBoorTable table(p, u - cell);
    return table.derivative(p, static_cast<int>(j), deriv_order) / std::pow(spec.spacing, deriv_order);
}

inline double tensor_bspline_eval(const SplineSpec& spec, int kx, int ky, double x, double y, int dx, int dy) {
    if (dx > spec.degree || dy > spec.degree) throw Error("derivative order exceeds degree");
    const double bx = bspline_eval(spec, kx, x, dx);
    if (bx == 0.0) return 0.0;
    return bx * bspline_eval(spec, ky, y, dy);
}

/// Spline on uniform knots with coefficients for indices first..first+size-1.
struct Spline1D {
    SplineSpec spec;
    int first = 0;
    std::vector<double> coefficients;

    [[nodiscard]] double eval(double x, int q = 0) const {
        if (coefficients.empty()) return 0.0;
        const LocalBasis1D b = local_basis(spec, x, q);
        double s = 0.0;
        for (int j = 0; j < b.count; ++j) {
            const int k = b.first + j - first;
            if (k < 0 || k >= static_cast<int>(coefficients.size())) continue;
            s += coefficients[k] * b.d[q][j];
        }
        return s;
    }

    /// value, first and second derivative in one pass
    [[nodiscard]] std::array<double, 3> eval2(double x) const {
        std::array<double, 3> r{0.0, 0.0, 0.0};
        if (coefficients.empty()) return r;
        const int nd = std::min(2, spec.degree);
        const LocalBasis1D b = local_basis(spec, x, nd);
        for (int j = 0; j < b.count; ++j) {
            const int k = b.first + j - first;
            if (k < 0 || k >= static_cast<int>(coefficients.size())) continue;
            for (int q = 0; q <= nd; ++q) r[q] += coefficients[k] * b.d[q][j];
        }
        return r;
    }
};

/// Interpolating spline of odd degree q = p+1 on n uniform intervals of [a, b] whose
/// knots are extended by q intervals on each side. Matches values at the n+1 knots
/// and derivatives of orders 1..p/2 at both ends.
inline Spline1D spline_interpolate(double a, double b, int n, int degree, std::span<const double> values,
                                   std::span<const double> left_derivs, std::span<const double> right_derivs) {
    const int q = degree;
    const int nd = (q - 1) / 2;
    if (n < 1 || !(b > a) || q < 1 || q % 2 == 0 || q > kMaxDegree || static_cast<int>(values.size()) != n + 1 ||
        static_cast<int>(left_derivs.size()) != nd || static_cast<int>(right_derivs.size()) != nd || nd > 3)
        throw Error("degenerate knot layout");
    Spline1D s;
    s.spec = SplineSpec{q, (b - a) / n, a};
    s.first = -q;
    const int m = n + q;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs(m);
    int row = 0;
    auto put = [&](double x, int order, double value) {
        const LocalBasis1D lb = local_basis(s.spec, x, order);
        for (int j = 0; j < lb.count; ++j) {
            const int k = lb.first + j - s.first;
            if (k >= 0 && k < m) sys(row, k) = lb.d[order][j];
        }
        rhs(row++) = value;
    };
    for (int i = 0; i <= n; ++i) put(s.spec.knot(i), 0, values[i]);
    for (int o = 1; o <= nd; ++o) put(a, o, left_derivs[o - 1]);
    for (int o = 1; o <= nd; ++o) put(b, o, right_derivs[o - 1]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.rank() < m) throw Error("degenerate knot layout");
    Eigen::VectorXd c = lu.solve(rhs);
    s.coefficients.assign(c.data(), c.data() + m);
    return s;
}

}  // namespace webplate
