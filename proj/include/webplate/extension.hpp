#pragma once

#include "webplate/geometry.hpp"
#include "webplate/spline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace webplate {

enum class ExtensionMode { Poisson, Biharmonic };

/// Boundary data along one edge: value and first two arclength derivatives at s.
using EdgeFunction = std::function<std::array<double, 3>(double s)>;

/// Per-edge data of a polygon boundary. `normal` is only read in biharmonic mode.
struct EdgeData {
    std::vector<EdgeFunction> value;
    std::vector<EdgeFunction> normal;

    /// Restriction of a global field given as a jet.
    static EdgeData restrict(const SimplePolygon& poly, const std::function<Jet(const Vec2&)>& field) {
        EdgeData d;
        for (int i = 0; i < poly.size(); ++i) {
            const Vec2 v = poly.vertex(i), t = poly.tangent(i), n = poly.normal(i);
            d.value.push_back([=](double s) {
                const Jet j = field(v + s * t);
                return std::array<double, 3>{j.v, j.along(t), j.second(t, t)};
            });
            d.normal.push_back([=](double s) {
                const Jet j = field(v + s * t);
                return std::array<double, 3>{j.along(n), j.second(n, t), 0.0};
            });
        }
        return d;
    }

    static EdgeData zero(int edges) {
        EdgeData d;
        const EdgeFunction z = [](double) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
        d.value.assign(static_cast<std::size_t>(edges), z);
        d.normal.assign(static_cast<std::size_t>(edges), z);
        return d;
    }
};

/// Mismatch of the data at vertex j, where edge j-1 ends and edge j starts.
struct VertexResidual {
    int vertex = 0;
    double value = 0.0;
    double normal_end = 0.0;    // g_{j-1}(L) minus the value implied by the tangential slopes
    double normal_start = 0.0;  // same for g_j(0)
    double second = 0.0;

    [[nodiscard]] double max() const {
        return std::max({std::abs(value), std::abs(normal_end), std::abs(normal_start), std::abs(second)});
    }
};

inline std::vector<VertexResidual> check_compatibility(const SimplePolygon& poly, const EdgeData& data,
                                                       ExtensionMode mode) {
    const int n = poly.size();
    if (static_cast<int>(data.value.size()) != n ||
        (mode == ExtensionMode::Biharmonic && static_cast<int>(data.normal.size()) != n))
        throw Error("edge data count does not match the polygon");
    std::vector<VertexResidual> out;
    for (int j = 0; j < n; ++j) {
        const int i = poly.wrap(j - 1);
        const auto fe = data.value[i](poly.edge_length(i));
        const auto fs = data.value[j](0.0);
        VertexResidual r;
        r.vertex = j;
        r.value = fe[0] - fs[0];
        if (mode == ExtensionMode::Biharmonic) {
            const Vec2 ti = poly.tangent(i), tj = poly.tangent(j);
            Eigen::Matrix2d m;
            m << ti.x(), ti.y(), tj.x(), tj.y();
            const Vec2 grad = m.inverse() * Vec2(fe[1], fs[1]);
            const auto ge = data.normal[i](poly.edge_length(i));
            const auto gs = data.normal[j](0.0);
            r.normal_end = ge[0] - grad.dot(poly.normal(i));
            r.normal_start = gs[0] - grad.dot(poly.normal(j));
            const double sn = ti.dot(poly.normal(j)), cs = ti.dot(tj);
            r.second = sn * (ge[1] + gs[1]) + cs * (fs[2] - fe[2]);
        }
        out.push_back(r);
    }
    return out;
}

struct ExtensionOptions {
    int degree = 2;              // even; edge splines have degree + 1
    int knots = 32;              // minimum interpolation intervals per edge
    double radius_factor = 0.25;  // vertex radius relative to the shorter adjacent edge
};

namespace detail {

/// Least-squares Chebyshev fit on [a, b], used to extrapolate removable-singularity limits.
class ChebyshevFit {
public:
    ChebyshevFit(const std::function<double(double)>& f, double a, double b, int degree = 12, int samples = 40)
        : a_(a), b_(b), c_(degree + 1) {
        Eigen::MatrixXd V(samples, degree + 1);
        Eigen::VectorXd y(samples);
        for (int k = 0; k < samples; ++k) {
            const double t = std::cos(std::numbers::pi * (k + 0.5) / samples);
            y[k] = f(0.5 * (a + b) + 0.5 * (b - a) * t);
            double t0 = 1.0, t1 = t;
            V(k, 0) = 1.0;
            if (degree >= 1) V(k, 1) = t;
            for (int m = 2; m <= degree; ++m) {
                const double t2 = 2.0 * t * t1 - t0;
                V(k, m) = t2;
                t0 = t1;
                t1 = t2;
            }
        }
        c_ = V.colPivHouseholderQr().solve(y);
    }

    /// q-th derivative at s (q <= 3).
    [[nodiscard]] double eval(double s, int q) const {
        const double t = (2.0 * s - a_ - b_) / (b_ - a_);
        const int m = static_cast<int>(c_.size());
        // T[d][k]: d-th derivative of T_k at t
        std::array<std::vector<double>, 4> T;
        for (auto& row : T) row.assign(static_cast<std::size_t>(m), 0.0);
        T[0][0] = 1.0;
        if (m > 1) {
            T[0][1] = t;
            T[1][1] = 1.0;
        }
        for (int k = 1; k + 1 < m; ++k)
            for (int d = 0; d <= q; ++d)
                T[d][k + 1] = 2.0 * t * T[d][k] - T[d][k - 1] + (d > 0 ? 2.0 * d * T[d - 1][k] : 0.0);
        double s_ = 0.0;
        for (int k = 0; k < m; ++k) s_ += c_[k] * T[q][k];
        return s_ * std::pow(2.0 / (b_ - a_), q);
    }

private:
    double a_, b_;
    Eigen::VectorXd c_;
};

/// Spline of odd degree q interpolating a function with removable end singularities on [0, L].
/// The limits are extrapolated from fits over windows of width wl and wr at the two ends.
inline Spline1D interpolate_edge_function(const std::function<double(double)>& f, double L, int N, int q, double wl,
                                          double wr) {
    const int nd = (q - 1) / 2;
    wl = std::min(wl, 0.3 * L);
    wr = std::min(wr, 0.3 * L);
    const double lo = 0.02 * wl, hi = L - 0.02 * wr;
    const ChebyshevFit left(f, lo, wl), right(f, L - wr, hi);
    std::vector<double> values(static_cast<std::size_t>(N) + 1), ld(static_cast<std::size_t>(nd)),
        rd(static_cast<std::size_t>(nd));
    for (int k = 0; k <= N; ++k) {
        const double s = L * k / N;
        values[k] = s < lo ? left.eval(s, 0) : s > hi ? right.eval(s, 0) : f(s);
    }
    for (int o = 1; o <= nd; ++o) {
        ld[o - 1] = left.eval(0.0, o);
        rd[o - 1] = right.eval(L, o);
    }
    return spline_interpolate(0.0, L, N, q, values, ld, rd);
}

inline Jet edge_weight(const Vec2& x, const EdgeFrame& f) { return -projection(x, f.v, f.n); }

}  // namespace detail

/// Smooth function on a polygon approximately matching Dirichlet (and Neumann) data.
class ExtensionFunction {
public:
    ExtensionFunction(const SimplePolygon& poly, const EdgeData& data, ExtensionMode mode, ExtensionOptions opt = {})
        : poly_(poly), mode_(mode), p_(opt.degree), q_(opt.degree + 1) {
        if (p_ < 2 || p_ % 2 != 0 || p_ > 6) throw Error("extension degree must be even and in 2..6");
        if (opt.knots < 1) throw Error("interpolation knot count must be positive");
        const int n = poly_.size();
        const auto res = check_compatibility(poly_, data, mode_);
        scale_ = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto f0 = data.value[i](0.0);
            scale_ = std::max(scale_, std::abs(f0[0]));
            if (mode_ == ExtensionMode::Biharmonic) scale_ = std::max(scale_, std::abs(data.normal[i](0.0)[0]) * poly_.edge_length(i));
        }
        for (const auto& r : res)
            if (r.max() > 1e-8 * std::max(1.0, scale_))
                throw Error("boundary data incompatible at vertex " + std::to_string(r.vertex));
        frames_ = build_edge_frames(poly_);
        knots_.resize(n);
        radius_.resize(n);
        for (int i = 0; i < n; ++i) {
            const EdgeFrame& f = frames_[i];
            knots_[i] = std::max(opt.knots, static_cast<int>(std::ceil(q_ * f.length / f.margin)));
            radius_[i] = opt.radius_factor * std::min(poly_.edge_length(i - 1), poly_.edge_length(i));
        }
        if (mode_ == ExtensionMode::Poisson) solve_poisson_vertices(data);
        else solve_biharmonic_vertices(data);
        build_edges(data);
    }

    [[nodiscard]] ExtensionMode mode() const { return mode_; }
    [[nodiscard]] int degree() const { return p_; }
    [[nodiscard]] const SimplePolygon& polygon() const { return poly_; }
    [[nodiscard]] const std::vector<EdgeFrame>& frames() const { return frames_; }
    [[nodiscard]] const std::vector<double>& radii() const { return radius_; }
    [[nodiscard]] const std::vector<int>& knots() const { return knots_; }

    [[nodiscard]] Jet eval(const Vec2& x) const {
        const int n = poly_.size();
        Jet u;
        for (int i = 0; i < n; ++i) {
            const Jet h = gaussian(i, x);
            if (h.v == 0.0) continue;
            if (mode_ == ExtensionMode::Poisson) {
                u += coef_[i][0] * h;
            } else {
                u += h * vertex_poly(i, x);
            }
        }
        for (int j = 0; j < n; ++j) {
            const EdgeFrame& f = frames_[j];
            const auto [alpha, beta] = edge_local_coords(f, x.x(), x.y());
            if (!f.in_box(alpha, beta)) continue;
            const double D = f.halfwidth;
            const Jet b = projection(x, f.v, f.n);
            const Jet r = compose(b, (D * D - beta * beta) / (D * D), -2.0 * beta / (D * D), -2.0 / (D * D));
            const Jet rq = pow(r, q_);
            const Jet a = projection(x, f.v, f.t);
            const Jet Om = detail::edge_weight(x, frames_[poly_.wrap(j - 1)]) * detail::edge_weight(x, frames_[poly_.wrap(j + 1)]);
            const auto ph = phi_[j].eval2(alpha);
            const Jet phi = compose(a, ph[0], ph[1], ph[2]);
            if (mode_ == ExtensionMode::Poisson) {
                u += phi * Om * rq;
            } else {
                const auto ps = psi_[j].eval2(alpha);
                const Jet psi = compose(a, ps[0], ps[1], ps[2]);
                const Jet Om2 = Om * Om;
                u += (phi * Om + psi * detail::edge_weight(x, f)) * Om2 * rq;
            }
        }
        return u;
    }

    [[nodiscard]] double value(const Vec2& x) const { return eval(x).v; }

    /// Partial derivative of order dx + dy <= 2.
    [[nodiscard]] double derivative(const Vec2& x, int dx, int dy) const { return eval(x).partial(dx, dy); }

    /// Finite-difference bilaplacian from exact Laplacians on a five-point stencil.
    [[nodiscard]] double bilaplacian(const Vec2& x, double step) const {
        const double c = eval(x).laplacian();
        double s = -4.0 * c;
        for (const Vec2& d : {Vec2(step, 0), Vec2(-step, 0), Vec2(0, step), Vec2(0, -step)}) s += eval(x + d).laplacian();
        return s / (step * step);
    }

    struct BoundaryError {
        double value = 0.0;
        double normal = 0.0;
    };

    /// Max deviation from the data over `samples` points per edge.
    [[nodiscard]] BoundaryError boundary_error(const EdgeData& data, int samples = 200) const {
        BoundaryError e;
        for (int j = 0; j < poly_.size(); ++j) {
            const EdgeFrame& f = frames_[j];
            for (int k = 0; k <= samples; ++k) {
                const double s = f.length * k / samples;
                const Jet u = eval(f.point(s, 0.0));
                e.value = std::max(e.value, std::abs(u.v - data.value[j](s)[0]));
                if (mode_ == ExtensionMode::Biharmonic)
                    e.normal = std::max(e.normal, std::abs(u.along(f.n) - data.normal[j](s)[0]));
            }
        }
        return e;
    }

private:
    [[nodiscard]] Jet gaussian(int i, const Vec2& x) const {
        const Vec2 d = x - poly_.vertex(i);
        const double R = radius_[i];
        const double d2 = d.squaredNorm();
        if (d2 > 64.0 * R * R) return Jet{};
        const double k = -1.0 / (R * R);
        return exp(Jet{k * d2, 2.0 * k * d.x(), 2.0 * k * d.y(), 2.0 * k, 0.0, 2.0 * k});
    }

    [[nodiscard]] std::array<Jet, 6> vertex_monomials(int i, const Vec2& x) const {
        const double R = radius_[i];
        const Jet a = detail::edge_weight(x, frames_[poly_.wrap(i - 1)]) * (1.0 / R);
        const Jet b = detail::edge_weight(x, frames_[i]) * (1.0 / R);
        return {Jet::constant(1.0), a, b, a * a, b * b, a * b};
    }

    [[nodiscard]] Jet vertex_poly(int i, const Vec2& x) const {
        const auto m = vertex_monomials(i, x);
        Jet s;
        for (int k = 0; k < 6; ++k) s += coef_[i][k] * m[k];
        return s;
    }

    [[nodiscard]] Jet vertex_sum(const Vec2& x) const {
        Jet s;
        for (int i = 0; i < poly_.size(); ++i) {
            const Jet h = gaussian(i, x);
            if (h.v == 0.0) continue;
            s += mode_ == ExtensionMode::Poisson ? coef_[i][0] * h : h * vertex_poly(i, x);
        }
        return s;
    }

    void solve_poisson_vertices(const EdgeData& data) {
        const int n = poly_.size();
        Eigen::MatrixXd G(n, n);
        Eigen::VectorXd rhs(n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) G(j, i) = gaussian(i, poly_.vertex(j)).v;
            rhs[j] = data.value[j](0.0)[0];
        }
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (!(sv[n - 1] > 1e-8 * sv[0])) throw Error("vertex radii too large");
        const Eigen::VectorXd a = svd.solve(rhs);
        coef_.assign(n, {});
        for (int i = 0; i < n; ++i) coef_[i][0] = a[i];
    }

    void solve_biharmonic_vertices(const EdgeData& data) {
        const int n = poly_.size();
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6 * n, 6 * n);
        Eigen::VectorXd rhs(6 * n);
        for (int j = 0; j < n; ++j) {
            const Vec2 v = poly_.vertex(j);
            const Vec2 t = poly_.tangent(j), nn = poly_.normal(j), tp = poly_.tangent(j - 1);
            for (int i = 0; i < n; ++i) {
                const Jet h = gaussian(i, v);
                if (h.v == 0.0) continue;
                const auto m = vertex_monomials(i, v);
                for (int k = 0; k < 6; ++k) {
                    const Jet b = h * m[k];
                    const int c = 6 * i + k;
                    M(6 * j + 0, c) = b.v;
                    M(6 * j + 1, c) = b.along(t);
                    M(6 * j + 2, c) = b.along(nn);
                    M(6 * j + 3, c) = b.second(t, t);
                    M(6 * j + 4, c) = b.second(nn, t);
                    M(6 * j + 5, c) = b.second(tp, tp);
                }
            }
            const auto f = data.value[j](0.0);
            const auto g = data.normal[j](0.0);
            const auto fp = data.value[poly_.wrap(j - 1)](poly_.edge_length(j - 1));
            rhs.segment<6>(6 * j) << f[0], f[1], g[0], f[2], g[1], fp[2];
        }
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (!(sv[6 * n - 1] > 1e-12 * sv[0])) throw Error("degenerate vertex angle");
        const Eigen::VectorXd c = svd.solve(rhs);
        coef_.assign(n, {});
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < 6; ++k) coef_[i][k] = c[6 * i + k];
    }

    void build_edges(const EdgeData& data) {
        const int n = poly_.size();
        phi_.assign(n, Spline1D{});
        psi_.assign(n, Spline1D{});
        for (int j = 0; j < n; ++j) {
            const EdgeFrame& f = frames_[j];
            const EdgeFrame& fm = frames_[poly_.wrap(j - 1)];
            const EdgeFrame& fp = frames_[poly_.wrap(j + 1)];
            auto Om = [&](const Vec2& x) { return detail::edge_weight(x, fm) * detail::edge_weight(x, fp); };
            if (mode_ == ExtensionMode::Poisson) {
                auto phit = [&](double s) {
                    const Vec2 x = f.point(s, 0.0);
                    return (data.value[j](s)[0] - vertex_sum(x).v) / Om(x).v;
                };
                phi_[j] = detail::interpolate_edge_function(phit, f.length, knots_[j], q_, window_ * radius_[j], window_ * radius_[poly_.wrap(j + 1)]);
            } else {
                auto phit = [&](double s) {
                    const Vec2 x = f.point(s, 0.0);
                    return (data.value[j](s)[0] - vertex_sum(x).v) / std::pow(Om(x).v, 3);
                };
                phi_[j] = detail::interpolate_edge_function(phit, f.length, knots_[j], q_, window_ * radius_[j], window_ * radius_[poly_.wrap(j + 1)]);
                auto psit = [&](double s) {
                    const Vec2 x = f.point(s, 0.0);
                    const Jet o = Om(x);
                    const double dn = vertex_sum(x).along(f.n) + 3.0 * phi_[j].eval(s) * o.v * o.v * o.along(f.n);
                    return (dn - data.normal[j](s)[0]) / (o.v * o.v);
                };
                psi_[j] = detail::interpolate_edge_function(psit, f.length, knots_[j], q_, window_ * radius_[j], window_ * radius_[poly_.wrap(j + 1)]);
            }
        }
    }

    SimplePolygon poly_;
    ExtensionMode mode_;
    int p_, q_;
    double scale_ = 0.0;
    double window_ = 1.0;
    std::vector<EdgeFrame> frames_;
    std::vector<int> knots_;
    std::vector<double> radius_;
    std::vector<std::array<double, 6>> coef_;
    std::vector<Spline1D> phi_, psi_;
};

inline ExtensionFunction build_poisson_extension(const SimplePolygon& poly, const EdgeData& data,
                                                 ExtensionOptions opt = {}) {
    return ExtensionFunction(poly, data, ExtensionMode::Poisson, opt);
}

inline ExtensionFunction build_biharmonic_extension(const SimplePolygon& poly, const EdgeData& data,
                                                    ExtensionOptions opt = {}) {
    return ExtensionFunction(poly, data, ExtensionMode::Biharmonic, opt);
}

}  // namespace webplate
