#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace webplate {

using Vec2 = Eigen::Vector2d;

/// Raised for every user-facing failure in the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Second-order Taylor data of a scalar field in the plane: value, gradient, Hessian.
struct Jet {
    double v = 0.0;
    double dx = 0.0, dy = 0.0;
    double dxx = 0.0, dxy = 0.0, dyy = 0.0;

    static Jet constant(double c) { return Jet{c}; }
    static Jet coord_x(double x) { return Jet{x, 1.0, 0.0}; }
    static Jet coord_y(double y) { return Jet{y, 0.0, 1.0}; }
    /// a + g.(x - x0) evaluated at x
    static Jet affine(double value, const Vec2& grad) { return Jet{value, grad.x(), grad.y()}; }

    [[nodiscard]] Vec2 grad() const { return {dx, dy}; }
    [[nodiscard]] Eigen::Matrix2d hess() const {
        Eigen::Matrix2d h;
        h << dxx, dxy, dxy, dyy;
        return h;
    }
    [[nodiscard]] double laplacian() const { return dxx + dyy; }
    [[nodiscard]] double along(const Vec2& t) const { return dx * t.x() + dy * t.y(); }
    [[nodiscard]] double second(const Vec2& a, const Vec2& b) const {
        return dxx * a.x() * b.x() + dxy * (a.x() * b.y() + a.y() * b.x()) + dyy * a.y() * b.y();
    }

    /// Partial derivative d^(ox+oy) / dx^ox dy^oy for ox + oy <= 2.
    [[nodiscard]] double partial(int ox, int oy) const {
        switch (ox * 3 + oy) {
        case 0: return v;
        case 3: return dx;
        case 1: return dy;
        case 6: return dxx;
        case 4: return dxy;
        case 2: return dyy;
        default: throw Error("derivative order exceeds jet order");
        }
    }

    Jet& operator+=(const Jet& o) {
        v += o.v; dx += o.dx; dy += o.dy; dxx += o.dxx; dxy += o.dxy; dyy += o.dyy;
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        v -= o.v; dx -= o.dx; dy -= o.dy; dxx -= o.dxx; dxy -= o.dxy; dyy -= o.dyy;
        return *this;
    }
    Jet& operator*=(double s) {
        v *= s; dx *= s; dy *= s; dxx *= s; dxy *= s; dyy *= s;
        return *this;
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) { a.v += s; return a; }
inline Jet operator+(double s, Jet a) { a.v += s; return a; }
inline Jet operator-(Jet a, double s) { a.v -= s; return a; }
inline Jet operator-(double s, const Jet& a) { return s + (-a); }

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    r.dx = a.dx * b.v + a.v * b.dx;
    r.dy = a.dy * b.v + a.v * b.dy;
    r.dxx = a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx;
    r.dxy = a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy;
    r.dyy = a.dyy * b.v + 2.0 * a.dy * b.dy + a.v * b.dyy;
    return r;
}

/// f(a) for a scalar function with derivatives f0 = f(a.v), f1 = f'(a.v), f2 = f''(a.v).
inline Jet compose(const Jet& a, double f0, double f1, double f2) {
    Jet r;
    r.v = f0;
    r.dx = f1 * a.dx;
    r.dy = f1 * a.dy;
    r.dxx = f1 * a.dxx + f2 * a.dx * a.dx;
    r.dxy = f1 * a.dxy + f2 * a.dx * a.dy;
    r.dyy = f1 * a.dyy + f2 * a.dy * a.dy;
    return r;
}

inline Jet sqr(const Jet& a) { return a * a; }

inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return compose(a, e, e, e);
}

inline Jet inverse(const Jet& a) {
    const double i = 1.0 / a.v;
    return compose(a, i, -i * i, 2.0 * i * i * i);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }

inline Jet pow(const Jet& a, int n) {
    if (n == 0) return Jet::constant(1.0);
    const double p2 = n >= 2 ? std::pow(a.v, n - 2) : 0.0;
    const double p1 = n >= 1 ? std::pow(a.v, n - 1) : 0.0;
    return compose(a, std::pow(a.v, n), n * p1, n * (n - 1) * p2);
}

/// Polar angle of p - c, continuous away from the branch cut on the negative axis.
inline Jet polar_angle(const Vec2& p, const Vec2& c) {
    const double x = p.x() - c.x(), y = p.y() - c.y();
    const double r2 = x * x + y * y;
    Jet r;
    r.v = std::atan2(y, x);
    r.dx = -y / r2;
    r.dy = x / r2;
    r.dxx = 2.0 * x * y / (r2 * r2);
    r.dyy = -2.0 * x * y / (r2 * r2);
    r.dxy = (y * y - x * x) / (r2 * r2);
    return r;
}

/// Jet of (p - c).u as a function of p.
inline Jet projection(const Vec2& p, const Vec2& c, const Vec2& u) {
    return Jet{(p - c).dot(u), u.x(), u.y()};
}

}  // namespace webplate
