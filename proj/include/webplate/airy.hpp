#pragma once

#include "webplate/extension.hpp"
#include "webplate/plate.hpp"
#include "webplate/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace webplate {

/// Point on a closed boundary curve traversed with the domain on its left.
struct BoundaryPoint {
    int boundary = 0;  // 0 outer, k hole k-1
    int edge = -1;     // polygon edge, -1 on circles
    double s = 0.0;    // arclength from the curve start
    Vec2 x{0.0, 0.0};
    Vec2 t{1.0, 0.0};
    Vec2 n{0.0, -1.0};  // outward normal of the domain
};

/// Closed boundary curve parametrized by arclength: polygon edges or one circle.
class BoundaryCurve {
public:
    static BoundaryCurve polygon(const SimplePolygon& poly, int boundary) {
        BoundaryCurve c;
        c.boundary_ = boundary;
        c.poly_ = poly;
        double s = 0.0;
        for (int i = 0; i < poly.size(); ++i) {
            c.starts_.push_back(s);
            c.lengths_.push_back(poly.edge_length(i));
            s += poly.edge_length(i);
        }
        c.length_ = s;
        return c;
    }

    /// Outer circles run counterclockwise from angle 0, holes clockwise from angle 0.
    static BoundaryCurve circle(const Circle& circ, bool outer, int boundary) {
        BoundaryCurve c;
        c.boundary_ = boundary;
        c.circle_ = circ;
        c.is_circle_ = true;
        c.orientation_ = outer ? 1.0 : -1.0;
        c.length_ = 2.0 * std::numbers::pi * circ.radius;
        c.starts_ = {0.0};
        c.lengths_ = {c.length_};
        return c;
    }

    [[nodiscard]] bool is_circle() const { return is_circle_; }
    [[nodiscard]] const Circle& circle() const { return circle_; }
    [[nodiscard]] const SimplePolygon& polygon() const { return poly_; }
    [[nodiscard]] int boundary() const { return boundary_; }
    [[nodiscard]] double length() const { return length_; }
    [[nodiscard]] int pieces() const { return static_cast<int>(starts_.size()); }
    [[nodiscard]] double piece_start(int e) const { return starts_[e]; }
    [[nodiscard]] double piece_length(int e) const { return lengths_[e]; }
    /// +1 counterclockwise, -1 clockwise (circles only).
    [[nodiscard]] double orientation() const { return orientation_; }
    /// Signed curvature: dt/ds = -curvature * n.
    [[nodiscard]] double curvature() const { return is_circle_ ? orientation_ / circle_.radius : 0.0; }

    /// Point at local arclength s on piece e.
    [[nodiscard]] BoundaryPoint point(int e, double s) const {
        BoundaryPoint b;
        b.boundary = boundary_;
        b.s = starts_[e] + s;
        if (is_circle_) {
            const double th = orientation_ * s / circle_.radius;
            const Vec2 er(std::cos(th), std::sin(th));
            b.x = circle_.center + circle_.radius * er;
            b.t = orientation_ * Vec2(-er.y(), er.x());
            b.n = orientation_ * er;
            return b;
        }
        b.edge = e;
        b.t = poly_.tangent(e);
        b.n = poly_.normal(e);
        b.x = poly_.vertex(e) + s * b.t;
        return b;
    }

    /// Arclength from the start at polar angle th (circles only).
    [[nodiscard]] double arclength_at_angle(double th) const {
        const double two_pi = 2.0 * std::numbers::pi;
        double a = std::fmod(orientation_ * th, two_pi);
        if (a < 0.0) a += two_pi;
        return a * circle_.radius;
    }

private:
    int boundary_ = 0;
    bool is_circle_ = false;
    double orientation_ = 1.0;
    Circle circle_;
    SimplePolygon poly_;
    std::vector<double> starts_, lengths_;
    double length_ = 0.0;
};

/// Boundary curves of a domain: outer first, then the holes.
inline std::vector<BoundaryCurve> boundary_curves(const DomainSpec& d) {
    std::vector<BoundaryCurve> out;
    if (d.outer_is_circle()) out.push_back(BoundaryCurve::circle(d.outer_circle(), true, 0));
    else out.push_back(BoundaryCurve::polygon(*d.outer_polygon(), 0));
    for (std::size_t k = 0; k < d.holes.size(); ++k)
        out.push_back(BoundaryCurve::circle(d.holes[k].circle, false, static_cast<int>(k) + 1));
    return out;
}

/// Traction (force per unit length) acting on one boundary curve.
struct TractionBC {
    std::function<Vec2(const BoundaryPoint&)> traction;

    [[nodiscard]] Vec2 operator()(const BoundaryPoint& p) const { return traction ? traction(p) : Vec2(0.0, 0.0); }

    static TractionBC free() {
        return {[](const BoundaryPoint&) { return Vec2(0.0, 0.0); }};
    }
    /// Pressure p pushing against the boundary; p > 0 compresses.
    static TractionBC normal_pressure(double p) {
        return {[p](const BoundaryPoint& b) { return Vec2(-p * b.n); }};
    }
    /// Traction of a homogeneous stress state.
    static TractionBC uniform_stress(double sxx, double syy, double sxy) {
        return {[=](const BoundaryPoint& b) {
            return Vec2(sxx * b.n.x() + sxy * b.n.y(), sxy * b.n.x() + syy * b.n.y());
        }};
    }
};

/// Integrated tractions along one curve, started at its first point.
class BoundaryPotentials {
public:
    struct Value {
        Vec2 f{0.0, 0.0};  // (f_x, f_y): gradient of the stress function
        double F = 0.0, dF = 0.0, d2F = 0.0;
        double N = 0.0, dN = 0.0;
    };

    BoundaryPotentials(BoundaryCurve curve, TractionBC bc, int panels = 16, int order = 12)
        : curve_(std::move(curve)), bc_(std::move(bc)), order_(order) {
        const int P = curve_.is_circle() ? 4 * panels : panels;
        origin_ = curve_.point(0, 0.0).x;
        Vec2 f(0.0, 0.0);
        double I = 0.0;
        for (int e = 0; e < curve_.pieces(); ++e) {
            const double L = curve_.piece_length(e);
            for (int k = 0; k < P; ++k) {
                Panel pn{e, L * k / P, L * (k + 1) / P, f, I};
                panels_.push_back(pn);
                const auto [df, dI, mag] = integrate(pn, pn.b);
                f += df;
                I += dI;
                magnitude_ += mag;
            }
        }
        per_piece_ = P;
        end_force_ = f;
        end_moment_ = I;  // F at the end point, since x(L) = x(0)
    }

    [[nodiscard]] const BoundaryCurve& curve() const { return curve_; }
    [[nodiscard]] const TractionBC& traction() const { return bc_; }
    [[nodiscard]] Vec2 net_force() const { return end_force_; }
    /// Net moment of the tractions about the start point.
    [[nodiscard]] double net_moment() const { return end_moment_; }
    /// Integral of |T| over the curve.
    [[nodiscard]] double magnitude() const { return magnitude_; }

    [[nodiscard]] bool balanced(double rel = 1e-8) const {
        const Box b = bounds();
        const double size = std::max(b.width(), b.height());
        return end_force_.norm() <= rel * magnitude_ && std::abs(end_moment_) <= rel * magnitude_ * size;
    }

    /// Potentials at local arclength s of piece e.
    [[nodiscard]] Value eval(int e, double s) const {
        const double L = curve_.piece_length(e);
        s = std::clamp(s, 0.0, L);
        const int k = std::min(per_piece_ - 1, static_cast<int>(s / L * per_piece_));
        const Panel& pn = panels_[static_cast<std::size_t>(e) * per_piece_ + k];
        const auto [df, dI, mag] = integrate(pn, s);
        (void)mag;
        const BoundaryPoint bp = curve_.point(e, s);
        const Vec2 T = bc_(bp);
        Value v;
        v.f = pn.f0 + df;
        const double I = pn.I0 + dI;
        const double kappa = curve_.curvature();
        v.F = (bp.x - origin_).dot(v.f) + I;
        v.dF = bp.t.dot(v.f);
        v.d2F = -kappa * bp.n.dot(v.f) + bp.n.dot(T);
        v.N = bp.n.dot(v.f);
        v.dN = kappa * bp.t.dot(v.f) - bp.t.dot(T);
        return v;
    }

    /// Potentials at global arclength s in [0, length].
    [[nodiscard]] Value eval_global(double s) const {
        int e = 0;
        while (e + 1 < curve_.pieces() && s >= curve_.piece_start(e + 1)) ++e;
        return eval(e, s - curve_.piece_start(e));
    }

private:
    struct Panel {
        int piece;
        double a, b;
        Vec2 f0;
        double I0;
    };

    [[nodiscard]] std::tuple<Vec2, double, double> integrate(const Panel& pn, double s) const {
        Vec2 df(0.0, 0.0);
        double dI = 0.0, mag = 0.0;
        if (s <= pn.a) return {df, dI, mag};
        const GaussLegendre& g = gauss_legendre(order_);
        const double half = 0.5 * (s - pn.a), mid = 0.5 * (s + pn.a);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const BoundaryPoint bp = curve_.point(pn.piece, mid + half * g.x[q]);
            const Vec2 T = bc_(bp);
            const double w = half * g.w[q];
            const Vec2 r = bp.x - origin_;
            df += w * Vec2(-T.y(), T.x());
            dI += w * (r.x() * T.y() - r.y() * T.x());
            mag += w * T.norm();
        }
        return {df, dI, mag};
    }

    [[nodiscard]] Box bounds() const {
        if (curve_.is_circle()) {
            const Circle& c = curve_.circle();
            return Box{c.center - Vec2(c.radius, c.radius), c.center + Vec2(c.radius, c.radius)};
        }
        return curve_.polygon().bounding_box();
    }

    BoundaryCurve curve_;
    TractionBC bc_;
    int order_;
    int per_piece_ = 1;
    std::vector<Panel> panels_;
    Vec2 origin_{0.0, 0.0};
    Vec2 end_force_{0.0, 0.0};
    double end_moment_ = 0.0;
    double magnitude_ = 0.0;
};

/// Integrates the tractions; throws when the curve is not in equilibrium on its own.
inline BoundaryPotentials integrate_tractions(const BoundaryCurve& curve, const TractionBC& bc) {
    BoundaryPotentials pot(curve, bc);
    if (!pot.balanced()) throw Error("Airy formulation inapplicable: unbalanced boundary");
    return pot;
}

/// Polygon edge data (value and normal derivative) of the stress function from its potentials.
inline EdgeData polygon_edge_data(const std::shared_ptr<const BoundaryPotentials>& pot) {
    EdgeData d;
    const BoundaryCurve& c = pot->curve();
    for (int e = 0; e < c.pieces(); ++e) {
        d.value.push_back([pot, e](double s) {
            const auto v = pot->eval(e, s);
            return std::array<double, 3>{v.F, v.dF, v.d2F};
        });
        d.normal.push_back([pot, e](double s) {
            const auto v = pot->eval(e, s);
            return std::array<double, 3>{v.N, v.dN, 0.0};
        });
    }
    return d;
}

namespace detail {

/// Trigonometric interpolant of equispaced periodic samples on [0, 2pi).
class TrigInterpolant {
public:
    TrigInterpolant() = default;
    explicit TrigInterpolant(const std::vector<double>& v) {
        const int M = static_cast<int>(v.size());
        if (M < 4 || M % 2 != 0) throw Error("trigonometric interpolation needs an even sample count");
        const int H = M / 2;
        a_.assign(H + 1, 0.0);
        b_.assign(H + 1, 0.0);
        for (int m = 0; m <= H; ++m) {
            for (int k = 0; k < M; ++k) {
                const double th = 2.0 * std::numbers::pi * k / M;
                a_[m] += v[k] * std::cos(m * th);
                b_[m] += v[k] * std::sin(m * th);
            }
            const double scale = (m == 0 || m == H) ? 1.0 / M : 2.0 / M;
            a_[m] *= scale;
            b_[m] *= scale;
        }
        b_[H] = 0.0;
    }

    /// Value and first two derivatives.
    [[nodiscard]] std::array<double, 3> eval(double th) const {
        std::array<double, 3> r{a_.empty() ? 0.0 : a_[0], 0.0, 0.0};
        const double c1 = std::cos(th), s1 = std::sin(th);
        double c = 1.0, s = 0.0;
        for (std::size_t m = 1; m < a_.size(); ++m) {
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            const double dm = static_cast<double>(m);
            r[0] += a_[m] * c + b_[m] * s;
            r[1] += dm * (b_[m] * c - a_[m] * s);
            r[2] -= dm * dm * (a_[m] * c + b_[m] * s);
        }
        return r;
    }

private:
    std::vector<double> a_, b_;
};

/// C^m step: 0 at t <= 0, 1 at t >= 1, polynomial in between.
class Smoothstep {
public:
    explicit Smoothstep(int m = 6) : m_(m) {
        double c = 1.0;
        for (int k = m + 1; k <= 2 * m + 1; ++k) c *= k;
        for (int k = 2; k <= m; ++k) c /= k;
        c_ = c;  // (2m+1)! / (m!)^2
        double binom = 1.0;
        for (int k = 0; k <= m; ++k) {
            coef_.push_back(c_ * binom * ((k % 2) ? -1.0 : 1.0) / (m + k + 1));
            binom = binom * (m - k) / (k + 1);
        }
    }

    [[nodiscard]] std::array<double, 3> eval(double t) const {
        if (t <= 0.0) return {0.0, 0.0, 0.0};
        if (t >= 1.0) return {1.0, 0.0, 0.0};
        double v = 0.0;
        for (int k = m_; k >= 0; --k) v = v * t + coef_[k];
        v *= std::pow(t, m_ + 1);
        const double tm = std::pow(t, m_ - 1), um = std::pow(1.0 - t, m_ - 1);
        const double d1 = c_ * tm * t * um * (1.0 - t);
        const double d2 = c_ * m_ * tm * um * ((1.0 - t) - t);
        return {v, d1, d2};
    }

private:
    int m_;
    double c_ = 1.0;
    std::vector<double> coef_;
};

inline Jet radius_jet(const Vec2& x, const Vec2& c) {
    const Vec2 d = x - c;
    const double r = d.norm();
    const double r3 = r * r * r;
    return Jet{r, d.x() / r, d.y() / r, d.y() * d.y() / r3, -d.x() * d.y() / r3, d.x() * d.x() / r3};
}

/// Least-squares quadratic matching the value and normal derivative of boundary data.
class QuadraticFit {
public:
    QuadraticFit() = default;

    explicit QuadraticFit(const BoundaryPotentials& pot, int samples = 400) {
        const BoundaryCurve& c = pot.curve();
        const Box b = c.is_circle() ? Box{c.circle().center - Vec2(c.circle().radius, c.circle().radius),
                                          c.circle().center + Vec2(c.circle().radius, c.circle().radius)}
                                    : c.polygon().bounding_box();
        center_ = 0.5 * (b.lo + b.hi);
        scale_ = 0.5 * std::max(b.width(), b.height());
        Eigen::MatrixXd A(2 * samples, 6);
        Eigen::VectorXd rhs(2 * samples);
        for (int k = 0; k < samples; ++k) {
            const double s = c.length() * (k + 0.5) / samples;
            const auto v = pot.eval_global(s);
            int e = 0;
            while (e + 1 < c.pieces() && s >= c.piece_start(e + 1)) ++e;
            const BoundaryPoint bp = c.point(e, s - c.piece_start(e));
            const auto m = monomials(bp.x);
            for (int j = 0; j < 6; ++j) {
                A(2 * k, j) = m[j].v;
                A(2 * k + 1, j) = scale_ * m[j].along(bp.n);
            }
            rhs[2 * k] = v.F;
            rhs[2 * k + 1] = scale_ * v.N;
        }
        coef_ = A.colPivHouseholderQr().solve(rhs);
    }

    [[nodiscard]] Jet eval(const Vec2& x) const {
        const auto m = monomials(x);
        Jet u;
        for (int j = 0; j < 6; ++j) u += coef_[j] * m[j];
        return u;
    }

private:
    [[nodiscard]] std::array<Jet, 6> monomials(const Vec2& x) const {
        const double k = 1.0 / scale_;
        const Jet X{(x.x() - center_.x()) * k, k, 0.0}, Y{(x.y() - center_.y()) * k, 0.0, k};
        return {Jet::constant(1.0), X, Y, X * X, X * Y, Y * Y};
    }

    Vec2 center_{0.0, 0.0};
    double scale_ = 1.0;
    Eigen::Matrix<double, 6, 1> coef_ = Eigen::Matrix<double, 6, 1>::Zero();
};

/// Radial cutoff equal to one on a circle, flat there, and zero at distance `width` into the domain.
class CircleCutoff {
public:
    CircleCutoff() = default;
    CircleCutoff(const Circle& c, bool outer, double width) : c_(c), sign_(outer ? 1.0 : -1.0), width_(width) {}

    [[nodiscard]] const Circle& circle() const { return c_; }
    [[nodiscard]] double width() const { return width_; }
    [[nodiscard]] double sign() const { return sign_; }

    /// Band coordinate: 0 on the circle, 1 at the inner edge of the band.
    [[nodiscard]] double band(const Vec2& x) const { return sign_ * (c_.radius - (x - c_.center).norm()) / width_; }

    [[nodiscard]] Jet eval(const Vec2& x) const {
        const double t = band(x);
        if (t <= 0.0) return Jet::constant(1.0);
        if (t >= 1.0) return Jet{};
        const auto s = step().eval(t);
        const double k = -sign_ / width_;  // dt/dr
        return compose(radius_jet(x, c_.center), 1.0 - s[0], -s[1] * k, -s[2] * k * k);
    }

private:
    static const Smoothstep& step() {
        static const Smoothstep s(6);
        return s;
    }
    Circle c_;
    double sign_ = 1.0;
    double width_ = 1.0;
};

/// Closed-form lift on a circle: value F and outward normal derivative N, cut off into the domain.
class CircleLift {
public:
    /// Lifts the potentials minus the traces of `shift`.
    CircleLift(const BoundaryPotentials& pot, const std::function<Jet(const Vec2&)>& shift, const CircleCutoff& cut,
               int samples)
        : cut_(cut) {
        const BoundaryCurve& c = pot.curve();
        const auto data = [&](double th) {
            const double s = c.arclength_at_angle(th);
            const auto v = pot.eval_global(s);
            const BoundaryPoint bp = c.point(0, s);
            const Jet q = shift(bp.x);
            return std::array<double, 2>{v.F - q.v, v.N - q.along(bp.n)};
        };
        std::vector<double> F(samples), N(samples);
        for (int k = 0; k < samples; ++k) {
            const auto v = data(2.0 * std::numbers::pi * k / samples);
            F[k] = v[0];
            N[k] = v[1];
        }
        F_ = TrigInterpolant(F);
        N_ = TrigInterpolant(N);
        // residual at the midpoints between samples
        for (int k = 0; k < samples; ++k) {
            const double th = 2.0 * std::numbers::pi * (k + 0.5) / samples;
            const auto v = data(th);
            residual_ = std::max({residual_, std::abs(F_.eval(th)[0] - v[0]), std::abs(N_.eval(th)[0] - v[1])});
        }
    }

    [[nodiscard]] double residual() const { return residual_; }

    [[nodiscard]] Jet eval(const Vec2& x) const {
        const Jet chi = cut_.eval(x);
        if (chi.v == 0.0 && chi.dx == 0.0 && chi.dy == 0.0 && chi.dxx == 0.0) return Jet{};
        const Circle& c = cut_.circle();
        const Jet th = polar_angle(x, c.center);
        const auto f = F_.eval(th.v), g = N_.eval(th.v);
        const Jet r = radius_jet(x, c.center);
        const Jet base = compose(th, f[0], f[1], f[2]) + cut_.sign() * (r - c.radius) * compose(th, g[0], g[1], g[2]);
        return base * chi;
    }

private:
    CircleCutoff cut_;
    TrigInterpolant F_, N_;
    double residual_ = 0.0;
};

}  // namespace detail

struct AiryOptions {
    int degree = 5;
    QuadOptions quad;
    int extension_knots = 64;
    int trig_samples = 128;
};

/// Degree of the polygon extension used for a given stress basis degree.
inline int airy_extension_degree(int degree) {
    const int e = degree % 2 ? degree + 1 : degree + 2;
    return std::min(e, 6);
}

/// Per-boundary affine constants: the stress function equals gamma + alpha x + beta y on that boundary
/// in addition to the traction potential.
struct GaugeConstants {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

struct AiryDiagnostics {
    double lift_residual = 0.0;       // worst mismatch of the lifted boundary data
    double weak_residual = 0.0;       // worst relative residual of the homogeneous solves
    std::array<double, 3> constraint{0.0, 0.0, 0.0};  // mean, x- and y-moment of the composed function
    int unknowns = 0;
    int subproblems = 0;
};

/// Stress function assembled from subproblem solutions, lifts and gauge constants.
class AirySolution {
public:
    using LiftFn = std::function<Jet(const Vec2&)>;

    AirySolution(DomainSpec domain, std::shared_ptr<const WebBasis> basis, Eigen::VectorXd plain,
                 std::vector<LiftFn> lifts, std::vector<double> lift_weights, std::vector<GaugeConstants> gauge,
                 Eigen::MatrixXd subproblems, AiryDiagnostics diag)
        : domain_(std::move(domain)), basis_(std::move(basis)), plain_(std::move(plain)), lifts_(std::move(lifts)),
          weights_(std::move(lift_weights)), gauge_(std::move(gauge)), sub_(std::move(subproblems)), diag_(diag) {
        const Box b = domain_.bounding_box();
        scale_ = std::max(b.width(), b.height());
        affine_ = {gauge_[0].gamma, gauge_[0].alpha, gauge_[0].beta};
    }

    [[nodiscard]] const DomainSpec& domain() const { return domain_; }
    [[nodiscard]] const std::shared_ptr<const WebBasis>& basis() const { return basis_; }
    [[nodiscard]] const std::vector<GaugeConstants>& gauge() const { return gauge_; }
    /// Reduced coefficient vectors of the independent subproblems, one column each.
    [[nodiscard]] const Eigen::MatrixXd& subproblem_coefficients() const { return sub_; }
    [[nodiscard]] const AiryDiagnostics& diagnostics() const { return diag_; }

    /// Composed stress function without any domain check.
    [[nodiscard]] Jet phi(const Vec2& x) const {
        Jet u = basis_->field(plain_, x);
        for (std::size_t r = 0; r < lifts_.size(); ++r)
            if (weights_[r] != 0.0) u += weights_[r] * lifts_[r](x);
        return u + Jet::affine(affine_[0] + affine_[1] * x.x() + affine_[2] * x.y(), Vec2(affine_[1], affine_[2]));
    }

    [[nodiscard]] StressState stress(const Vec2& x) const {
        if (!domain_.contains(x) && domain_.boundary_distance(x) > 1e-9 * scale_)
            throw Error("stress evaluation point outside the domain");
        const Jet p = phi(x);
        return StressState{p.dyy, p.dxx, -p.dxy};
    }

    /// Copy with a + b x + c y added to the stress function.
    [[nodiscard]] AirySolution shifted(double a, double b, double c) const {
        AirySolution s = *this;
        s.affine_[0] += a;
        s.affine_[1] += b;
        s.affine_[2] += c;
        return s;
    }

private:
    DomainSpec domain_;
    std::shared_ptr<const WebBasis> basis_;
    Eigen::VectorXd plain_;
    std::vector<LiftFn> lifts_;
    std::vector<double> weights_;
    std::vector<GaugeConstants> gauge_;
    Eigen::MatrixXd sub_;
    AiryDiagnostics diag_;
    std::array<double, 3> affine_{0.0, 0.0, 0.0};
    double scale_ = 1.0;
};

inline StressState stress_eval(const AirySolution& sol, double x, double y) { return sol.stress(Vec2(x, y)); }

inline StressField to_stress_field(std::shared_ptr<const AirySolution> sol) {
    return StressField([sol](const Vec2& x) { return sol->stress(x); }, "airy-solve");
}

namespace detail {

/// Cutoff band width for each boundary circle: the gap to the nearest other boundary.
inline double circle_band_width(const DomainSpec& d, int boundary) {
    const auto gap_to_outer = [&](const Circle& h) {
        if (d.outer_is_circle()) {
            const Circle& o = d.outer_circle();
            return o.radius - (h.center - o.center).norm() - h.radius;
        }
        return d.outer_polygon()->distance(h.center) - h.radius;
    };
    double w = std::numeric_limits<double>::infinity();
    if (boundary == 0) {
        w = 0.75 * d.outer_circle().radius;
        for (const auto& h : d.holes) w = std::min(w, gap_to_outer(h.circle));
        return w;
    }
    const Circle& h = d.holes[static_cast<std::size_t>(boundary - 1)].circle;
    w = gap_to_outer(h);
    for (std::size_t j = 0; j < d.holes.size(); ++j) {
        if (static_cast<int>(j) == boundary - 1) continue;
        const Circle& o = d.holes[j].circle;
        w = std::min(w, (h.center - o.center).norm() - h.radius - o.radius);
    }
    return w;
}

}  // namespace detail

/// Plane-stress solve for the stress function under boundary tractions, one TractionBC per boundary
/// (outer first, then the holes in order).
inline AirySolution solve_airy(const DomainSpec& domain, const std::vector<TractionBC>& bcs, double h,
                               const AiryOptions& opt = {}) {
    domain.validate();
    const int nh = static_cast<int>(domain.holes.size());
    if (static_cast<int>(bcs.size()) != nh + 1) throw Error("one traction condition per boundary required");
    if (opt.degree < 2 || opt.degree > kMaxDegree) throw Error("Airy basis degree out of range");

    // boundary potentials
    const auto curves = boundary_curves(domain);
    std::vector<std::shared_ptr<const BoundaryPotentials>> pots;
    for (int i = 0; i <= nh; ++i)
        pots.push_back(std::make_shared<const BoundaryPotentials>(integrate_tractions(curves[i], bcs[i])));

    // lifts: [outer traction, hole traction..., (hole i: 1, x, y)...]
    AiryDiagnostics diag;
    std::vector<detail::CircleCutoff> cuts;
    for (int i = 1; i <= nh; ++i)
        cuts.emplace_back(domain.holes[i - 1].circle, false, detail::circle_band_width(domain, i));
    // a global quadratic fitted to the outer data carries the smooth part; the lifts carry the rest
    const detail::QuadraticFit quad(*pots[0]);
    const std::function<Jet(const Vec2&)> shift = [quad](const Vec2& x) { return quad.eval(x); };
    std::vector<AirySolution::LiftFn> lifts;
    if (domain.outer_is_circle()) {
        const detail::CircleCutoff cut(domain.outer_circle(), true, detail::circle_band_width(domain, 0));
        auto lift = std::make_shared<const detail::CircleLift>(*pots[0], shift, cut, opt.trig_samples);
        diag.lift_residual = std::max(diag.lift_residual, lift->residual());
        lifts.emplace_back([lift, quad](const Vec2& x) { return quad.eval(x) + lift->eval(x); });
    } else {
        ExtensionOptions eo;
        eo.degree = airy_extension_degree(opt.degree);
        eo.knots = opt.extension_knots;
        const SimplePolygon poly = *domain.outer_polygon();
        const EdgeData full = polygon_edge_data(pots[0]);
        const EdgeData smooth = EdgeData::restrict(poly, shift);
        EdgeData data;
        for (int e = 0; e < poly.size(); ++e) {
            const auto minus = [](const EdgeFunction& a, const EdgeFunction& b) -> EdgeFunction {
                return [a, b](double s) {
                    const auto u = a(s), v = b(s);
                    return std::array<double, 3>{u[0] - v[0], u[1] - v[1], u[2] - v[2]};
                };
            };
            data.value.push_back(minus(full.value[e], smooth.value[e]));
            data.normal.push_back(minus(full.normal[e], smooth.normal[e]));
        }
        auto ext = std::make_shared<const ExtensionFunction>(poly, data, ExtensionMode::Biharmonic, eo);
        const auto err = ext->boundary_error(data);
        diag.lift_residual = std::max({diag.lift_residual, err.value, err.normal});
        lifts.emplace_back([ext, cuts, quad](const Vec2& x) {
            Jet u = ext->eval(x);
            for (const auto& c : cuts) u = u * (1.0 - c.eval(x));
            return quad.eval(x) + u;
        });
    }
    for (int i = 1; i <= nh; ++i) {
        auto lift = std::make_shared<const detail::CircleLift>(*pots[i], shift, cuts[i - 1], opt.trig_samples);
        diag.lift_residual = std::max(diag.lift_residual, lift->residual());
        lifts.emplace_back([lift](const Vec2& x) { return lift->eval(x); });
    }
    for (int i = 1; i <= nh; ++i) {
        const detail::CircleCutoff cut = cuts[i - 1];
        lifts.emplace_back([cut](const Vec2& x) { return cut.eval(x); });
        lifts.emplace_back([cut](const Vec2& x) { return Jet::coord_x(x.x()) * cut.eval(x); });
        lifts.emplace_back([cut](const Vec2& x) { return Jet::coord_y(x.y()) * cut.eval(x); });
    }
    const int R = static_cast<int>(lifts.size());
    diag.subproblems = R;

    // homogeneous Galerkin solves with one factorization
    const Discretization disc = Discretization::build(domain, clamped_weight(domain), h, opt.degree, opt.quad);
    const WebBasis& basis = *disc.basis;
    detail::StencilAssembler acc(basis);
    detail::assemble_area(disc, acc, [](const Vec2&, double wq, const detail::WeightedLocal& wl, std::vector<double>& local, int n) {
        for (int a = 0; a < n; ++a) {
            const double la = wq * wl.w[a].laplacian();
            for (int b = a; b < n; ++b) local[static_cast<std::size_t>(a) * n + b] += la * wl.w[b].laplacian();
        }
    });
    const SparseSym K = detail::reduce(basis, acc.matrix());
    diag.unknowns = K.size();

    Eigen::MatrixXd rhs_plain = Eigen::MatrixXd::Zero(basis.relevant_size(), R);
    detail::WeightedLocal wl;
    std::vector<double> lap(static_cast<std::size_t>(R));
    for (const auto& cr : disc.rules)
        for (std::size_t q = 0; q < cr.rule.size(); ++q) {
            const Vec2& x = cr.rule.nodes[q];
            bool any = false;
            for (int r = 0; r < R; ++r) {
                lap[r] = lifts[r](x).laplacian();
                any = any || lap[r] != 0.0;
            }
            if (!any) continue;
            wl.eval(basis, x, cr.cell);
            for (int k = 0; k < wl.ls.count; ++k) {
                const double lb = cr.rule.weights[q] * wl.w[k].laplacian();
                for (int r = 0; r < R; ++r) rhs_plain(wl.ls.ids[k], r) -= lb * lap[r];
            }
        }
    const Eigen::MatrixXd rhs = basis.extension_matrix() * rhs_plain;
    const Factorization fact(K);
    const Eigen::MatrixXd U = fact.solve(rhs);
    for (int r = 0; r < R; ++r) {
        const double nb = rhs.col(r).norm();
        if (nb > 0.0) diag.weak_residual = std::max(diag.weak_residual, (rhs.col(r) - K.matrix() * U.col(r)).norm() / nb);
    }
    const Eigen::MatrixXd P = basis.extension_matrix().transpose() * U;

    // energy products and constraint integrals of the gauge families
    const int M = 3 * (nh + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M, M);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(M);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, M);
    Eigen::Vector3d c0 = Eigen::Vector3d::Zero();
    std::vector<Jet> sub(static_cast<std::size_t>(R));
    std::vector<Jet> psi(static_cast<std::size_t>(M));
    for (const auto& cr : disc.rules)
        for (std::size_t q = 0; q < cr.rule.size(); ++q) {
            const Vec2& x = cr.rule.nodes[q];
            const double wq = cr.rule.weights[q];
            wl.eval(basis, x, cr.cell);
            for (int r = 0; r < R; ++r) {
                Jet u = lifts[r](x);
                for (int k = 0; k < wl.ls.count; ++k) u += P(wl.ls.ids[k], r) * wl.w[k];
                sub[r] = u;
            }
            Jet base = sub[0];
            for (int i = 1; i <= nh; ++i) base += sub[i];
            psi[0] = Jet::constant(1.0);
            psi[1] = Jet::coord_x(x.x());
            psi[2] = Jet::coord_y(x.y());
            for (int i = 1; i <= nh; ++i)
                for (int k = 0; k < 3; ++k) {
                    const Jet& s = sub[1 + nh + 3 * (i - 1) + k];
                    psi[3 * i + k] = s;
                    psi[k] -= s;
                }
            for (int m = 0; m < M; ++m) {
                const double lm = wq * psi[m].laplacian();
                g[m] += lm * base.laplacian();
                for (int n = m; n < M; ++n) H(m, n) += lm * psi[n].laplacian();
                C(0, m) += wq * psi[m].v;
                C(1, m) += wq * psi[m].dx;
                C(2, m) += wq * psi[m].dy;
            }
            c0 += wq * Eigen::Vector3d(base.v, base.dx, base.dy);
        }
    H = H.selfadjointView<Eigen::Upper>();

    // minimise the energy subject to the three mean constraints
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(M + 3, M + 3);
    kkt.topLeftCorner(M, M) = H;
    kkt.topRightCorner(M, 3) = C.transpose();
    kkt.bottomLeftCorner(3, M) = C;
    Eigen::VectorXd kr(M + 3);
    kr << -g, -c0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(kkt);
    const auto sv = svd.singularValues();
    if (!(sv[sv.size() - 1] > 1e-13 * sv[0])) throw Error("gauge constraints degenerate");
    const Eigen::VectorXd cvec = Eigen::FullPivLU<Eigen::MatrixXd>(kkt).solve(kr).head(M);
    const Eigen::Vector3d cres = c0 + C * cvec;
    for (int k = 0; k < 3; ++k) diag.constraint[k] = cres[k];

    // compose
    std::vector<GaugeConstants> gauge(static_cast<std::size_t>(nh + 1));
    for (int i = 0; i <= nh; ++i) gauge[i] = {cvec[3 * i + 1], cvec[3 * i + 2], cvec[3 * i]};
    std::vector<double> weights(static_cast<std::size_t>(R), 0.0);
    for (int i = 0; i <= nh; ++i) weights[i] = 1.0;
    for (int i = 1; i <= nh; ++i)
        for (int k = 0; k < 3; ++k) weights[1 + nh + 3 * (i - 1) + k] = cvec[3 * i + k] - cvec[k];
    Eigen::VectorXd plain = Eigen::VectorXd::Zero(basis.relevant_size());
    for (int r = 0; r < R; ++r) plain += weights[r] * P.col(r);
    return AirySolution(domain, disc.basis, plain, std::move(lifts), std::move(weights), std::move(gauge), U, diag);
}

}  // namespace webplate
