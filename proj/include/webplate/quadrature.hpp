#pragma once

#include "webplate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace webplate {

struct QuadratureRule {
    std::vector<Vec2> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
    [[nodiscard]] double total() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
    void add(const Vec2& x, double w) {
        nodes.push_back(x);
        weights.push_back(w);
    }
    void append(const QuadratureRule& o) {
        nodes.insert(nodes.end(), o.nodes.begin(), o.nodes.end());
        weights.insert(weights.end(), o.weights.begin(), o.weights.end());
    }
};

struct SegmentRule {
    std::vector<Vec2> nodes;
    std::vector<Vec2> tangents;
    std::vector<double> weights;
    std::vector<double> arclength;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
    [[nodiscard]] double total() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> x, w;
};

inline const GaussLegendre& gauss_legendre(int n) {
    if (n < 1 || n > 64) throw Error("quadrature order out of range");
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussLegendre g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x[i] = -z;
        g.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return cache.emplace(n, std::move(g)).first->second;
}

inline QuadratureRule interior_cell_rule(const Box& cell, int order) {
    const GaussLegendre& g = gauss_legendre(order);
    QuadratureRule r;
    const Vec2 c = cell.center();
    const double hx = 0.5 * cell.width(), hy = 0.5 * cell.height();
    r.nodes.reserve(order * order);
    r.weights.reserve(order * order);
    for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i) r.add(Vec2(c.x() + hx * g.x[i], c.y() + hy * g.x[j]), hx * hy * g.w[i] * g.w[j]);
    return r;
}

/// Collapsed tensor rule on a triangle; exact for total degree 2*order - 2.
inline void triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int order, QuadratureRule& out) {
    const double area2 = cross(b - a, c - a);
    if (!(area2 > 0.0)) return;
    const GaussLegendre& g = gauss_legendre(order);
    for (int i = 0; i < order; ++i) {
        const double xi = 0.5 * (g.x[i] + 1.0);
        for (int j = 0; j < order; ++j) {
            const double eta = 0.5 * (g.x[j] + 1.0);
            const double u = xi * (1.0 - eta), v = xi * eta;
            out.add(a + u * (b - a) + v * (c - a), 0.25 * g.w[i] * g.w[j] * xi * area2);
        }
    }
}

/// Keep the part of a convex polygon on the left of the directed line through p with direction d.
inline std::vector<Vec2> clip_left(const std::vector<Vec2>& poly, const Vec2& p, const Vec2& d, bool keep_left = true) {
    std::vector<Vec2> out;
    const int n = static_cast<int>(poly.size());
    auto side = [&](const Vec2& x) { return keep_left ? cross(d, x - p) : -cross(d, x - p); };
    for (int i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const double sa = side(a), sb = side(b);
        if (sa >= 0.0) out.push_back(a);
        if ((sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0)) out.push_back(a + (sa / (sa - sb)) * (b - a));
    }
    return out;
}

inline void convex_polygon_rule(const std::vector<Vec2>& poly, int order, QuadratureRule& out) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) triangle_rule(poly[0], poly[k], poly[k + 1], order, out);
}

inline std::vector<Vec2> box_polygon(const Box& b) {
    return {b.lo, Vec2(b.hi.x(), b.lo.y()), b.hi, Vec2(b.lo.x(), b.hi.y())};
}

namespace detail {

/// Exact integration over box ∩ (disk or its complement) when the circle is a graph over the
/// first coordinate inside the box. Returns false if the box does not meet the preconditions.
inline bool circle_graph_rule(const BoundaryPrimitive& c, const Box& box, bool over_x, int order, QuadratureRule& out) {
    auto sw = [&](const Vec2& p) { return over_x ? p : Vec2(p.y(), p.x()); };
    const Vec2 lo = sw(box.lo), hi = sw(box.hi), cc = sw(c.center);
    const double R = c.radius;
    double s;
    if (lo.y() > cc.y()) s = 1.0;
    else if (hi.y() < cc.y()) s = -1.0;
    else return false;
    const bool below = c.domain_inside == (s > 0.0);
    auto g = [&](double u) {
        const double d = R * R - (u - cc.x()) * (u - cc.x());
        return d > 0.0 ? cc.y() + s * std::sqrt(d) : cc.y();
    };
    std::vector<double> br{lo.x(), hi.x()};
    for (double v : {lo.y(), hi.y()}) {
        const double d = R * R - (v - cc.y()) * (v - cc.y());
        if (d <= 0.0) continue;
        for (double u : {cc.x() - std::sqrt(d), cc.x() + std::sqrt(d)})
            if (u > lo.x() && u < hi.x()) br.push_back(u);
    }
    for (double u : {cc.x() - R, cc.x() + R})
        if (u > lo.x() && u < hi.x()) br.push_back(u);
    std::sort(br.begin(), br.end());
    const GaussLegendre& gl = gauss_legendre(order);
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double a = br[k], b = br[k + 1];
        if (b - a <= 0.0) continue;
        for (int i = 0; i < order; ++i) {
            const double u = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[i];
            const double gu = g(u);
            const double vlo = below ? lo.y() : std::max(lo.y(), gu);
            const double vhi = below ? std::min(hi.y(), gu) : hi.y();
            if (vhi <= vlo) continue;
            for (int j = 0; j < order; ++j) {
                const double v = 0.5 * (vlo + vhi) + 0.5 * (vhi - vlo) * gl.x[j];
                out.add(sw(Vec2(u, v)), 0.25 * (b - a) * (vhi - vlo) * gl.w[i] * gl.w[j]);
            }
        }
    }
    return true;
}

inline bool try_circle_leaf(const BoundaryPrimitive& c, const Box& box, int order, bool force, QuadratureRule& out) {
    const double size = std::max(box.width(), box.height());
    if (!force && size > 0.5 * c.radius) return false;
    const bool x_ok = box.lo.y() > c.center.y() || box.hi.y() < c.center.y();
    const bool y_ok = box.lo.x() > c.center.x() || box.hi.x() < c.center.x();
    // largest slope of the arc as a graph over the given axis inside the box
    auto slope = [&](int axis) {
        const double u = std::min(c.radius, std::max(std::abs(box.lo[axis] - c.center[axis]), std::abs(box.hi[axis] - c.center[axis])));
        const double v2 = c.radius * c.radius - u * u;
        return v2 > 0.0 ? u / std::sqrt(v2) : std::numeric_limits<double>::infinity();
    };
    const double sx = x_ok ? slope(0) : std::numeric_limits<double>::infinity();
    const double sy = y_ok ? slope(1) : std::numeric_limits<double>::infinity();
    const bool over_x = sx <= sy;
    if (std::min(sx, sy) <= 2.0 || (force && (x_ok || y_ok))) return circle_graph_rule(c, box, over_x, order, out);
    return false;
}

inline bool strictly_outside(const Vec2& p, const Box& b) { return !b.contains(p); }

/// Box cut by polygon edges only: one edge crossing, or two adjacent edges meeting inside.
inline bool try_polygon_leaf(const std::vector<BoundaryPrimitive>& prims, const std::vector<int>& cut, const Box& box,
                             int order, double tol, QuadratureRule& out) {
    const auto poly = box_polygon(box);
    const Box inner = box.shrunk(tol);
    if (cut.size() == 1) {
        const auto& e = prims[cut[0]];
        if (!strictly_outside(e.a, inner) || !strictly_outside(e.b, inner)) return false;
        convex_polygon_rule(clip_left(poly, e.a, e.b - e.a), order, out);
        return true;
    }
    if (cut.size() != 2) return false;
    const BoundaryPrimitive* in = &prims[cut[0]];
    const BoundaryPrimitive* outg = &prims[cut[1]];
    if (in->b != outg->a) std::swap(in, outg);
    if (in->b != outg->a) return false;
    const Vec2 v = in->b;
    if (!box.contains(v) || !strictly_outside(in->a, inner) || !strictly_outside(outg->b, inner)) return false;
    const Vec2 d1 = in->b - in->a, d2 = outg->b - outg->a;
    if (cross(d1, d2) > 0.0) {
        convex_polygon_rule(clip_left(clip_left(poly, in->a, d1), outg->a, d2), order, out);
    } else {
        convex_polygon_rule(clip_left(poly, in->a, d1), order, out);
        convex_polygon_rule(clip_left(clip_left(poly, outg->a, d2), in->a, d1, false), order, out);
    }
    return true;
}

inline void cut_recurse(const DomainSpec& d, const std::vector<BoundaryPrimitive>& prims, const Box& box, int order,
                        int depth, int max_depth, double tol, QuadratureRule& out) {
    const BoxClassification c = classify_box(d, prims, box, tol);
    if (c.cls == CellClass::Exterior) return;
    if (c.cls == CellClass::Interior) {
        out.append(interior_cell_rule(box, order));
        return;
    }
    const bool last = depth >= max_depth;
    bool all_segments = true;
    for (int k : c.cutting) all_segments = all_segments && prims[k].type == BoundaryPrimitive::Type::Segment;
    if (all_segments && try_polygon_leaf(prims, c.cutting, box, order, tol, out)) return;
    if (c.cutting.size() == 1 && prims[c.cutting[0]].type == BoundaryPrimitive::Type::Circle &&
        try_circle_leaf(prims[c.cutting[0]], box, order, last, out))
        return;
    if (last) {
        const QuadratureRule r = interior_cell_rule(box, order);
        for (std::size_t i = 0; i < r.size(); ++i)
            if (d.contains(r.nodes[i])) out.add(r.nodes[i], r.weights[i]);
        return;
    }
    const Vec2 m = box.center();
    cut_recurse(d, prims, Box{box.lo, m}, order, depth + 1, max_depth, tol, out);
    cut_recurse(d, prims, Box{Vec2(m.x(), box.lo.y()), Vec2(box.hi.x(), m.y())}, order, depth + 1, max_depth, tol, out);
    cut_recurse(d, prims, Box{Vec2(box.lo.x(), m.y()), Vec2(m.x(), box.hi.y())}, order, depth + 1, max_depth, tol, out);
    cut_recurse(d, prims, Box{m, box.hi}, order, depth + 1, max_depth, tol, out);
}

}  // namespace detail

/// Quadrature over cell ∩ Ω. Subcells cut by a single edge, a single vertex wedge or a single
/// circle arc are integrated over their exact shape; otherwise the cell is split until
/// max_depth, where nodes outside Ω are dropped.
inline QuadratureRule cut_cell_rule(const Box& cell, const DomainSpec& domain, int order, int max_depth,
                                    const std::vector<BoundaryPrimitive>* prims = nullptr) {
    std::vector<BoundaryPrimitive> own;
    if (!prims) {
        own = domain.primitives();
        prims = &own;
    }
    QuadratureRule r;
    detail::cut_recurse(domain, *prims, cell, order, 0, max_depth, 1e-12 * std::max(cell.width(), cell.height()), r);
    return r;
}

/// Straight segment split at every grid line crossing, Gauss rule per piece.
inline SegmentRule segment_rule(const Vec2& a, const Vec2& b, const GridSpec& grid, int order) {
    const double L = (b - a).norm();
    if (!(L > 0.0)) throw Error("zero-length segment");
    const Vec2 t = (b - a) / L;
    std::vector<double> br{0.0, 1.0};
    for (int axis = 0; axis < 2; ++axis) {
        const double x0 = a[axis], x1 = b[axis];
        if (x0 == x1) continue;
        const double o = grid.origin[axis];
        const double lo = std::min(x0, x1), hi = std::max(x0, x1);
        for (double k = std::ceil((lo - o) / grid.h); o + k * grid.h <= hi; k += 1.0) {
            const double s = (o + k * grid.h - x0) / (x1 - x0);
            if (s > 0.0 && s < 1.0) br.push_back(s);
        }
    }
    std::sort(br.begin(), br.end());
    const GaussLegendre& g = gauss_legendre(order);
    SegmentRule r;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double s0 = br[k], s1 = br[k + 1];
        if (s1 - s0 <= 1e-14) continue;
        for (int i = 0; i < order; ++i) {
            const double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * g.x[i];
            r.nodes.push_back(a + s * (b - a));
            r.tangents.push_back(t);
            r.weights.push_back(0.5 * (s1 - s0) * L * g.w[i]);
            r.arclength.push_back(s * L);
        }
    }
    return r;
}

/// Full circle traversed counterclockwise from angle 0, split at grid line crossings.
inline SegmentRule circle_rule(const Circle& c, const GridSpec& grid, int order) {
    if (!(c.radius > 0.0)) throw Error("zero-length segment");
    std::vector<double> br{0.0, 2.0 * std::numbers::pi};
    auto add_angle = [&](double th) {
        th = std::fmod(th + 4.0 * std::numbers::pi, 2.0 * std::numbers::pi);
        if (th > 0.0 && th < 2.0 * std::numbers::pi) br.push_back(th);
    };
    for (int axis = 0; axis < 2; ++axis) {
        const double o = grid.origin[axis];
        const double lo = c.center[axis] - c.radius, hi = c.center[axis] + c.radius;
        for (double k = std::ceil((lo - o) / grid.h); o + k * grid.h <= hi; k += 1.0) {
            const double q = std::clamp((o + k * grid.h - c.center[axis]) / c.radius, -1.0, 1.0);
            const double base = axis == 0 ? std::acos(q) : std::asin(q);
            if (axis == 0) {
                add_angle(base);
                add_angle(-base);
            } else {
                add_angle(base);
                add_angle(std::numbers::pi - base);
            }
        }
    }
    std::sort(br.begin(), br.end());
    const GaussLegendre& g = gauss_legendre(order);
    SegmentRule r;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double s0 = br[k], s1 = br[k + 1];
        if (s1 - s0 <= 1e-14) continue;
        for (int i = 0; i < order; ++i) {
            const double th = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * g.x[i];
            r.nodes.push_back(c.center + c.radius * Vec2(std::cos(th), std::sin(th)));
            r.tangents.push_back(Vec2(-std::sin(th), std::cos(th)));
            r.weights.push_back(0.5 * (s1 - s0) * c.radius * g.w[i]);
            r.arclength.push_back(th * c.radius);
        }
    }
    return r;
}

}  // namespace webplate
