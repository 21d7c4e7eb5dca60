#pragma once

#include "webplate/jet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace webplate {

struct Box {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{0.0, 0.0};

    [[nodiscard]] Vec2 center() const { return 0.5 * (lo + hi); }
    [[nodiscard]] double width() const { return hi.x() - lo.x(); }
    [[nodiscard]] double height() const { return hi.y() - lo.y(); }
    [[nodiscard]] bool contains(const Vec2& p) const {
        return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
    }
    [[nodiscard]] Box shrunk(double d) const { return Box{lo + Vec2(d, d), hi - Vec2(d, d)}; }
    void expand(const Vec2& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    static Box empty() {
        const double inf = std::numeric_limits<double>::infinity();
        return Box{Vec2(inf, inf), Vec2(-inf, -inf)};
    }
};

/// Liang-Barsky test: does the closed segment ab meet the closed box?
inline bool segment_meets_box(const Vec2& a, const Vec2& b, const Box& box) {
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = b - a;
    const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
    const double q[4] = {a.x() - box.lo.x(), box.hi.x() - a.x(), a.y() - box.lo.y(), box.hi.y() - a.y()};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return false;
        } else {
            const double r = q[k] / p[k];
            if (p[k] < 0.0) t0 = std::max(t0, r);
            else t1 = std::min(t1, r);
            if (t0 > t1) return false;
        }
    }
    return true;
}

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Closed-segment intersection test.
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) && std::min(p.y(), q.y()) <= r.y() &&
               r.y() <= std::max(p.y(), q.y());
    };
    if (d1 == 0 && on(a, b, c)) return true;
    if (d2 == 0 && on(a, b, d)) return true;
    if (d3 == 0 && on(c, d, a)) return true;
    if (d4 == 0 && on(c, d, b)) return true;
    return false;
}

/// Cells of side h; cell (i, j) covers origin + h*[i, i+1] x [j, j+1].
struct GridSpec {
    Vec2 origin{0.0, 0.0};
    double h = 1.0;
    int nx = 0, ny = 0;

    [[nodiscard]] Box cell_box(int i, int j) const {
        const Vec2 lo = origin + h * Vec2(i, j);
        return Box{lo, lo + Vec2(h, h)};
    }
    [[nodiscard]] Vec2 cell_center(int i, int j) const { return origin + h * Vec2(i + 0.5, j + 0.5); }
    [[nodiscard]] int cell_id(int i, int j) const { return j * nx + i; }
    [[nodiscard]] int cell_count() const { return nx * ny; }
};

/// Grid aligned with the lattice h*Z^2 covering the box plus `margin` cells on each side.
inline GridSpec make_grid(const Box& bbox, double h, int margin) {
    if (!(h > 0.0)) throw Error("cell size must be positive");
    GridSpec g;
    g.h = h;
    const double i0 = std::floor(bbox.lo.x() / h) - margin;
    const double j0 = std::floor(bbox.lo.y() / h) - margin;
    const double i1 = std::ceil(bbox.hi.x() / h) + margin;
    const double j1 = std::ceil(bbox.hi.y() / h) + margin;
    g.origin = Vec2(i0 * h, j0 * h);
    g.nx = static_cast<int>(i1 - i0);
    g.ny = static_cast<int>(j1 - j0);
    return g;
}

// ---------------------------------------------------------------------------
// polygons and edge frames

class SimplePolygon {
public:
    SimplePolygon() = default;
    explicit SimplePolygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) { validate(); }

    [[nodiscard]] int size() const { return static_cast<int>(v_.size()); }
    [[nodiscard]] const Vec2& vertex(int i) const { return v_[wrap(i)]; }
    [[nodiscard]] const std::vector<Vec2>& vertices() const { return v_; }
    [[nodiscard]] int wrap(int i) const { const int n = size(); return ((i % n) + n) % n; }
    [[nodiscard]] Vec2 tangent(int i) const { return (vertex(i + 1) - vertex(i)).normalized(); }
    [[nodiscard]] Vec2 normal(int i) const { const Vec2 t = tangent(i); return {t.y(), -t.x()}; }
    [[nodiscard]] double edge_length(int i) const { return (vertex(i + 1) - vertex(i)).norm(); }
    [[nodiscard]] double perimeter() const {
        double s = 0.0;
        for (int i = 0; i < size(); ++i) s += edge_length(i);
        return s;
    }

    [[nodiscard]] double signed_area() const {
        double a = 0.0;
        for (int i = 0; i < size(); ++i) a += cross(vertex(i), vertex(i + 1));
        return 0.5 * a;
    }

    /// interior angle at vertex i exceeds pi
    [[nodiscard]] bool reflex(int i) const { return cross(vertex(i) - vertex(i - 1), vertex(i + 1) - vertex(i)) < 0.0; }

    [[nodiscard]] bool contains(const Vec2& p) const {
        bool in = false;
        for (int i = 0, n = size(); i < n; ++i) {
            const Vec2& a = vertex(i);
            const Vec2& b = vertex(i + 1);
            if ((a.y() > p.y()) != (b.y() > p.y())) {
                const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
                if (p.x() < x) in = !in;
            }
        }
        return in;
    }

    [[nodiscard]] double distance(const Vec2& p) const {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < size(); ++i) {
            const Vec2 a = vertex(i), b = vertex(i + 1);
            const double t = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
            d = std::min(d, (a + t * (b - a) - p).norm());
        }
        return d;
    }

    [[nodiscard]] Box bounding_box() const {
        Box b = Box::empty();
        for (const auto& p : v_) b.expand(p);
        return b;
    }

private:
    void validate() const {
        const int n = size();
        if (n < 3) throw Error("polygon needs at least three vertices");
        for (int i = 0; i < n; ++i)
            if ((vertex(i + 1) - vertex(i)).norm() == 0.0) throw Error("polygon has a degenerate vertex");
        for (int i = 0; i < n; ++i) {
            if (std::abs(cross(tangent(i - 1), tangent(i))) < 1e-12) throw Error("polygon has a degenerate vertex");
        }
        if (signed_area() <= 0.0) throw Error("polygon vertices must be counterclockwise");
        for (int i = 0; i < n; ++i)
            for (int k = i + 2; k < n; ++k) {
                if (i == 0 && k == n - 1) continue;
                if (segments_intersect(vertex(i), vertex(i + 1), vertex(k), vertex(k + 1)))
                    throw Error("polygon is not simple");
            }
    }

    std::vector<Vec2> v_;
};

/// Local frame of a polygon edge: x(alpha, beta) = v + alpha t + beta n.
struct EdgeFrame {
    int index = 0;
    Vec2 v{0.0, 0.0};
    Vec2 t{1.0, 0.0};
    Vec2 n{0.0, -1.0};
    double length = 1.0;
    double margin = 0.25;
    double halfwidth = 0.25;

    [[nodiscard]] Vec2 point(double alpha, double beta) const { return v + alpha * t + beta * n; }
    [[nodiscard]] bool in_box(double alpha, double beta) const {
        return alpha > -margin && alpha < length + margin && std::abs(beta) < halfwidth;
    }
};

inline std::pair<double, double> edge_local_coords(const EdgeFrame& f, double x, double y) {
    const Vec2 d(x - f.v.x(), y - f.v.y());
    return {f.t.dot(d), f.n.dot(d)};
}

namespace detail {

inline bool frame_box_clear(const SimplePolygon& poly, int i, double margin, double D) {
    const int n = poly.size();
    const Vec2 v = poly.vertex(i), t = poly.tangent(i), nn = poly.normal(i);
    const double L = poly.edge_length(i);
    const Box local{Vec2(-margin, -D), Vec2(L + margin, D)};
    for (int k = 0; k < n; ++k) {
        if (k == i || k == poly.wrap(i - 1) || k == poly.wrap(i + 1)) continue;
        const Vec2 a = poly.vertex(k) - v, b = poly.vertex(k + 1) - v;
        if (segment_meets_box(Vec2(a.dot(t), a.dot(nn)), Vec2(b.dot(t), b.dot(nn)), local)) return false;
    }
    return true;
}

}  // namespace detail

/// Frames for all edges. margin = 0.25 min(L_{i-1}, L_i, L_{i+1}) (halved until the
/// extended edge is clear); halfwidth = 0.95 of the largest clear value, capped at L_i.
inline std::vector<EdgeFrame> build_edge_frames(const SimplePolygon& poly) {
    std::vector<EdgeFrame> frames;
    const int n = poly.size();
    for (int i = 0; i < n; ++i) {
        EdgeFrame f;
        f.index = i;
        f.v = poly.vertex(i);
        f.t = poly.tangent(i);
        f.n = poly.normal(i);
        f.length = poly.edge_length(i);
        f.margin = 0.25 * std::min({poly.edge_length(i - 1), f.length, poly.edge_length(i + 1)});
        for (int it = 0; it < 60 && !detail::frame_box_clear(poly, i, f.margin, 0.0); ++it) f.margin *= 0.5;
        if (!detail::frame_box_clear(poly, i, f.margin, 0.0)) throw Error("edge extension intersects the polygon");
        double lo = 0.0, hi = f.length;
        if (detail::frame_box_clear(poly, i, f.margin, hi)) {
            f.halfwidth = hi;
        } else {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (detail::frame_box_clear(poly, i, f.margin, mid) ? lo : hi) = mid;
            }
            f.halfwidth = 0.95 * lo;
        }
        if (!(f.halfwidth > 0.0)) throw Error("edge support box degenerate");
        frames.push_back(f);
    }
    return frames;
}

// ---------------------------------------------------------------------------
// weight functions

/// Expression tree for weight functions with exact second-order derivatives.
class WeightFunction {
public:
    enum class Kind { Constant, Disk, CircleExterior, HalfPlane, Shift, Product, Square, RDisjunction };

    WeightFunction() : WeightFunction(constant(1.0)) {}

    static WeightFunction constant(double c) { return make(Kind::Constant, {}, c); }
    /// r^2 - |x - c|^2, positive inside the disk
    static WeightFunction disk(const Vec2& c, double r) { return make(Kind::Disk, {}, r, c); }
    /// |x - c|^2 - r^2, positive outside the disk
    static WeightFunction circle_exterior(const Vec2& c, double r) { return make(Kind::CircleExterior, {}, r, c); }
    /// -n.(x - p): signed distance, positive on the side opposite to the outward normal n
    static WeightFunction half_plane(const Vec2& p, const Vec2& n) { return make(Kind::HalfPlane, {}, 0.0, p, n); }
    /// w(x - shift)
    static WeightFunction shifted(const WeightFunction& w, const Vec2& shift) {
        return make(Kind::Shift, {w.node_}, 0.0, shift);
    }

    friend WeightFunction product(const WeightFunction& a, const WeightFunction& b) {
        return make(Kind::Product, {a.node_, b.node_});
    }
    friend WeightFunction square(const WeightFunction& a) { return make(Kind::Square, {a.node_}); }
    /// a + b + sqrt(a^2 + b^2): positive where a > 0 or b > 0
    friend WeightFunction r_disjunction(const WeightFunction& a, const WeightFunction& b) {
        return make(Kind::RDisjunction, {a.node_, b.node_});
    }

    [[nodiscard]] Jet eval(const Vec2& x) const { return eval_node(*node_, x, 2); }
    [[nodiscard]] Jet eval(double x, double y) const { return eval(Vec2(x, y)); }
    [[nodiscard]] double value(const Vec2& x) const { return eval_node(*node_, x, 0).v; }

private:
    struct Node {
        Kind kind;
        std::vector<std::shared_ptr<const Node>> children;
        double s = 0.0;
        Vec2 a{0.0, 0.0};
        Vec2 b{0.0, 0.0};
    };

    static WeightFunction make(Kind k, std::vector<std::shared_ptr<const Node>> ch, double s = 0.0,
                               const Vec2& a = Vec2::Zero(), const Vec2& b = Vec2::Zero()) {
        WeightFunction w(0);
        w.node_ = std::make_shared<const Node>(Node{k, std::move(ch), s, a, b});
        return w;
    }
    explicit WeightFunction(int) {}

    static Jet eval_node(const Node& nd, const Vec2& x, int order) {
        switch (nd.kind) {
        case Kind::Constant: return Jet::constant(nd.s);
        case Kind::Disk:
        case Kind::CircleExterior: {
            const Vec2 d = x - nd.a;
            const double sg = nd.kind == Kind::Disk ? -1.0 : 1.0;
            return Jet{sg * (d.squaredNorm() - nd.s * nd.s), sg * 2.0 * d.x(), sg * 2.0 * d.y(), sg * 2.0, 0.0,
                       sg * 2.0};
        }
        case Kind::HalfPlane: return Jet{-nd.b.dot(x - nd.a), -nd.b.x(), -nd.b.y()};
        case Kind::Shift: return eval_node(*nd.children[0], x - nd.a, order);
        case Kind::Product: return eval_node(*nd.children[0], x, order) * eval_node(*nd.children[1], x, order);
        case Kind::Square: return sqr(eval_node(*nd.children[0], x, order));
        case Kind::RDisjunction: {
            const Jet a = eval_node(*nd.children[0], x, order);
            const Jet b = eval_node(*nd.children[1], x, order);
            if (a.v == 0.0 && b.v == 0.0) {
                if (order > 0) throw Error("R-function derivative singular at corner");
                return Jet::constant(0.0);
            }
            return a + b + sqrt(sqr(a) + sqr(b));
        }
        }
        throw Error("malformed weight expression");
    }

    std::shared_ptr<const Node> node_;
};

inline Jet weight_eval(const WeightFunction& w, double x, double y) { return w.eval(x, y); }

// ---------------------------------------------------------------------------
// domains

enum class BoundaryCondition { Clamped, SimplySupported, Free };

inline std::string to_string(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::Clamped: return "clamped";
    case BoundaryCondition::SimplySupported: return "simply_supported";
    case BoundaryCondition::Free: return "free";
    }
    return "?";
}

inline BoundaryCondition parse_boundary_condition(const std::string& s) {
    if (s == "clamped") return BoundaryCondition::Clamped;
    if (s == "simply_supported") return BoundaryCondition::SimplySupported;
    if (s == "free") return BoundaryCondition::Free;
    throw Error("unknown boundary condition '" + s + "'");
}

struct Circle {
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
};

/// width x height rectangle centred at `center`, rotated counterclockwise by `angle` radians.
struct Rectangle {
    Vec2 center{0.0, 0.0};
    double width = 1.0;
    double height = 1.0;
    double angle = 0.0;

    [[nodiscard]] SimplePolygon polygon() const {
        const double c = std::cos(angle), s = std::sin(angle);
        std::vector<Vec2> v;
        for (const auto& q : {Vec2(-0.5, -0.5), Vec2(0.5, -0.5), Vec2(0.5, 0.5), Vec2(-0.5, 0.5)}) {
            const Vec2 l(q.x() * width, q.y() * height);
            v.emplace_back(center.x() + c * l.x() - s * l.y(), center.y() + s * l.x() + c * l.y());
        }
        return SimplePolygon(v);
    }
};

using OuterShape = std::variant<Circle, Rectangle, SimplePolygon>;

struct Hole {
    Circle circle;
    BoundaryCondition bc = BoundaryCondition::Free;
};

/// Piece of the boundary: a directed segment with the domain on its left, or a circle.
struct BoundaryPrimitive {
    enum class Type { Segment, Circle } type = Type::Segment;
    Vec2 a{0.0, 0.0}, b{0.0, 0.0};
    Vec2 center{0.0, 0.0};
    double radius = 0.0;
    bool domain_inside = true;
    int part = 0;  // 0 = outer boundary, k = hole k-1
};

struct DomainSpec {
    OuterShape outer = Circle{};
    BoundaryCondition outer_bc = BoundaryCondition::Clamped;
    std::vector<Hole> holes;

    [[nodiscard]] bool outer_is_circle() const { return std::holds_alternative<Circle>(outer); }
    [[nodiscard]] const Circle& outer_circle() const { return std::get<Circle>(outer); }

    /// Outer boundary as polygon; nullopt for circles.
    [[nodiscard]] std::optional<SimplePolygon> outer_polygon() const {
        if (auto r = std::get_if<Rectangle>(&outer)) return r->polygon();
        if (auto p = std::get_if<SimplePolygon>(&outer)) return *p;
        return std::nullopt;
    }

    [[nodiscard]] bool inside_outer(const Vec2& x) const {
        if (auto c = std::get_if<Circle>(&outer)) return (x - c->center).norm() < c->radius;
        return outer_polygon()->contains(x);
    }

    [[nodiscard]] bool contains(const Vec2& x) const {
        if (!inside_outer(x)) return false;
        for (const auto& h : holes)
            if ((x - h.circle.center).norm() <= h.circle.radius) return false;
        return true;
    }

    /// distance to the nearest boundary part
    [[nodiscard]] double boundary_distance(const Vec2& x) const {
        double d;
        if (auto c = std::get_if<Circle>(&outer)) d = std::abs((x - c->center).norm() - c->radius);
        else d = outer_polygon()->distance(x);
        for (const auto& h : holes) d = std::min(d, std::abs((x - h.circle.center).norm() - h.circle.radius));
        return d;
    }

    [[nodiscard]] Box bounding_box() const {
        if (auto c = std::get_if<Circle>(&outer))
            return Box{c->center - Vec2(c->radius, c->radius), c->center + Vec2(c->radius, c->radius)};
        return outer_polygon()->bounding_box();
    }

    [[nodiscard]] std::vector<BoundaryPrimitive> primitives() const {
        std::vector<BoundaryPrimitive> out;
        if (auto c = std::get_if<Circle>(&outer)) {
            BoundaryPrimitive p;
            p.type = BoundaryPrimitive::Type::Circle;
            p.center = c->center;
            p.radius = c->radius;
            p.domain_inside = true;
            out.push_back(p);
        } else {
            const SimplePolygon poly = *outer_polygon();
            for (int i = 0; i < poly.size(); ++i) {
                BoundaryPrimitive p;
                p.a = poly.vertex(i);
                p.b = poly.vertex(i + 1);
                out.push_back(p);
            }
        }
        for (std::size_t k = 0; k < holes.size(); ++k) {
            BoundaryPrimitive p;
            p.type = BoundaryPrimitive::Type::Circle;
            p.center = holes[k].circle.center;
            p.radius = holes[k].circle.radius;
            p.domain_inside = false;
            p.part = static_cast<int>(k) + 1;
            out.push_back(p);
        }
        return out;
    }

    void validate() const {
        if (auto c = std::get_if<Circle>(&outer))
            if (!(c->radius > 0.0)) throw Error("outer radius must be positive");
        if (auto r = std::get_if<Rectangle>(&outer))
            if (!(r->width > 0.0 && r->height > 0.0)) throw Error("rectangle sides must be positive");
        for (std::size_t k = 0; k < holes.size(); ++k) {
            const Circle& h = holes[k].circle;
            if (!(h.radius > 0.0)) throw Error("hole radius must be positive");
            if (!inside_outer(h.center)) throw Error("hole must lie strictly inside the outer boundary");
            double d;
            if (auto c = std::get_if<Circle>(&outer)) d = c->radius - (h.center - c->center).norm();
            else d = outer_polygon()->distance(h.center);
            if (d <= h.radius) throw Error("hole must lie strictly inside the outer boundary");
            for (std::size_t m = 0; m < k; ++m)
                if ((h.center - holes[m].circle.center).norm() <= h.radius + holes[m].circle.radius)
                    throw Error("holes must be pairwise disjoint");
        }
    }
};

inline int bc_power(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::Clamped: return 2;
    case BoundaryCondition::SimplySupported: return 1;
    case BoundaryCondition::Free: return 0;
    }
    return 0;
}

inline WeightFunction raised(const WeightFunction& w, int power) {
    if (power == 0) return WeightFunction::constant(1.0);
    return power == 2 ? square(w) : w;
}

/// Product of edge weights; edges meeting at a reflex vertex are joined by r-disjunction.
inline WeightFunction polygon_weight(const SimplePolygon& poly) {
    const int n = poly.size();
    std::vector<bool> used(n, false);
    auto edge_w = [&](int i) { return WeightFunction::half_plane(poly.vertex(i), poly.normal(i)); };
    WeightFunction w = WeightFunction::constant(1.0);
    for (int i = 0; i < n; ++i) {
        if (!poly.reflex(i)) continue;
        const int a = poly.wrap(i - 1), b = i;
        if (used[a] || used[b]) throw Error("polygon weight not representable: adjacent reflex vertices");
        used[a] = used[b] = true;
        w = product(w, r_disjunction(edge_w(b), edge_w(a)));
    }
    for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        for (int k = 0; k < n; ++k)
            if (-poly.normal(i).dot(poly.vertex(k) - poly.vertex(i)) < -1e-12 * poly.perimeter())
                throw Error("polygon weight not representable: edge line cuts the polygon");
        w = product(w, edge_w(i));
    }
    return w;
}

/// Weight factor vanishing on the outer boundary, positive inside.
inline WeightFunction outer_factor(const DomainSpec& d) {
    if (auto c = std::get_if<Circle>(&d.outer)) return WeightFunction::disk(c->center, c->radius);
    return polygon_weight(*d.outer_polygon());
}

/// Weight for the plate unknown: clamped parts squared, simply supported parts plain, free parts absent.
inline WeightFunction plate_weight(const DomainSpec& d) {
    WeightFunction w = raised(outer_factor(d), bc_power(d.outer_bc));
    for (const auto& h : d.holes)
        w = product(w, raised(WeightFunction::circle_exterior(h.circle.center, h.circle.radius), bc_power(h.bc)));
    return w;
}

/// Weight for the stress function: value and normal derivative vanish on every boundary part.
inline WeightFunction clamped_weight(const DomainSpec& d) {
    WeightFunction w = square(outer_factor(d));
    for (const auto& h : d.holes)
        w = product(w, square(WeightFunction::circle_exterior(h.circle.center, h.circle.radius)));
    return w;
}

// ---------------------------------------------------------------------------
// classification

enum class CellClass : unsigned char { Interior, Boundary, Exterior };

struct BoxClassification {
    CellClass cls = CellClass::Exterior;
    std::vector<int> cutting;  // primitive indices crossing the box
};

/// Exact predicates on the box shrunk by tol.
inline BoxClassification classify_box(const DomainSpec& d, const std::vector<BoundaryPrimitive>& prims,
                                      const Box& box, double tol) {
    BoxClassification out;
    const Box inner = box.shrunk(tol);
    bool outer_cut = false, outer_inside = false, hole_cut = false, in_hole = false;
    bool polygon_edge_cut = false;
    for (int k = 0; k < static_cast<int>(prims.size()); ++k) {
        const BoundaryPrimitive& p = prims[k];
        if (p.type == BoundaryPrimitive::Type::Segment) {
            if (segment_meets_box(p.a, p.b, inner)) {
                out.cutting.push_back(k);
                polygon_edge_cut = true;
            }
            continue;
        }
        const Vec2 c = p.center;
        const Vec2 nearest = c.cwiseMax(box.lo).cwiseMin(box.hi);
        const double dmin = (nearest - c).norm();
        const Vec2 far(std::max(std::abs(box.lo.x() - c.x()), std::abs(box.hi.x() - c.x())),
                       std::max(std::abs(box.lo.y() - c.y()), std::abs(box.hi.y() - c.y())));
        const double dmax = far.norm();
        const bool all_in = dmax <= p.radius + tol;
        const bool all_out = dmin >= p.radius - tol;
        const bool cut = !all_in && !all_out;
        if (cut) out.cutting.push_back(k);
        if (p.domain_inside) {
            outer_cut = cut;
            outer_inside = all_in;
        } else {
            hole_cut = hole_cut || cut;
            in_hole = in_hole || all_in;
        }
    }
    if (!d.outer_is_circle()) {
        outer_cut = polygon_edge_cut;
        outer_inside = !outer_cut && d.outer_polygon()->contains(box.center());
    }
    if (in_hole || (!outer_cut && !outer_inside)) {
        out.cls = CellClass::Exterior;
        out.cutting.clear();
    } else if (!outer_cut && !hole_cut) {
        out.cls = CellClass::Interior;
    } else {
        out.cls = CellClass::Boundary;
    }
    return out;
}

inline std::vector<CellClass> classify_cells(const GridSpec& grid, const DomainSpec& domain) {
    const auto prims = domain.primitives();
    std::vector<CellClass> out(grid.cell_count());
    const double tol = 1e-12 * grid.h;
    const Box dbox = domain.bounding_box();
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const Box b = grid.cell_box(i, j);
            if (b.lo.x() > dbox.hi.x() || b.hi.x() < dbox.lo.x() || b.lo.y() > dbox.hi.y() || b.hi.y() < dbox.lo.y()) {
                out[grid.cell_id(i, j)] = CellClass::Exterior;
                continue;
            }
            out[grid.cell_id(i, j)] = classify_box(domain, prims, b, tol).cls;
        }
    return out;
}

/// Halton points (bases 2, 3) over the bounding box, keeping those inside the domain.
inline std::vector<Vec2> halton_interior_points(const DomainSpec& d, int count) {
    auto radical = [](int i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        return r;
    };
    const Box b = d.bounding_box();
    std::vector<Vec2> pts;
    for (int i = 1; static_cast<int>(pts.size()) < count; ++i) {
        if (i > 1000 * count) throw Error("domain has no interior");
        const Vec2 p(b.lo.x() + radical(i, 2) * b.width(), b.lo.y() + radical(i, 3) * b.height());
        if (d.contains(p)) pts.push_back(p);
    }
    return pts;
}

}  // namespace webplate
