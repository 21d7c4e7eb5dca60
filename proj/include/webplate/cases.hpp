#pragma once

#include "webplate/airy.hpp"
#include "webplate/plate.hpp"

#include "json.hpp"

#include <algorithm>
#include <initializer_list>
#include <numbers>
#include <string>
#include <vector>

namespace webplate {

using Json = nlohmann::ordered_json;

struct OuterConfig {
    std::string shape = "circle";  // circle | rectangle | polygon
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
    double width = 1.0;
    double height = 1.0;
    double angle_deg = 0.0;
    std::vector<Vec2> vertices;
    std::string bc = "clamped";
};

struct HoleConfig {
    Vec2 center{0.0, 0.0};
    double radius = 0.1;
    std::string bc = "free";
};

/// lateral: constant pressure p0.
/// uniform: tractions of the stress state (sxx, syy, sxy) on the outer boundary, holes traction free.
/// pressure: normal pressure per boundary, outer first; missing entries are zero.
struct LoadConfig {
    std::string type = "lateral";
    double p0 = 1.0;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    std::vector<double> pressures;
    std::string stress_source = "auto";  // auto | analytic | airy
};

struct DiscretizationConfig {
    int p = 3;
    double h = 0.1;
    int quad_order = 0;
    int quad_depth = 6;
    int p_airy = 0;  // 0: p + 2, capped at the largest supported degree

    [[nodiscard]] int airy_degree() const { return p_airy > 0 ? p_airy : std::min(p + 2, kMaxDegree); }
};

struct SolverConfig {
    int modes = 1;
};

/// K = lambda * length^2 / (D * (pi^2 if pi_squared)). No K when length is 0.
struct ReportConfig {
    double k_length = 0.0;
    bool k_pi_squared = false;
};

struct OutputConfig {
    std::string summary;
    std::string field;
    double field_spacing = 0.0;  // 0: the cell size
};

struct CaseConfig {
    std::string id = "custom";
    std::string description;
    OuterConfig outer;
    std::vector<HoleConfig> holes;
    PlateMaterial material;
    std::vector<Stiffener> stiffeners;
    LoadConfig load;
    DiscretizationConfig discretization;
    SolverConfig solver;
    ReportConfig report;
    OutputConfig output;

    [[nodiscard]] DomainSpec domain() const {
        DomainSpec d;
        if (outer.shape == "circle") {
            d.outer = Circle{outer.center, outer.radius};
        } else if (outer.shape == "rectangle") {
            d.outer = Rectangle{outer.center, outer.width, outer.height, outer.angle_deg * std::numbers::pi / 180.0};
        } else if (outer.shape == "polygon") {
            d.outer = SimplePolygon(outer.vertices);
        } else {
            throw Error("unknown outer shape '" + outer.shape + "'");
        }
        d.outer_bc = parse_boundary_condition(outer.bc);
        for (const auto& h : holes) d.holes.push_back(Hole{Circle{h.center, h.radius}, parse_boundary_condition(h.bc)});
        return d;
    }

    [[nodiscard]] QuadOptions quad() const { return QuadOptions{discretization.quad_order, discretization.quad_depth}; }

    void validate() const {
        const DomainSpec d = domain();
        d.validate();
        material.validate();
        for (const auto& s : stiffeners) s.validate(d);
        if (discretization.p < 2 || discretization.p > kMaxDegree)
            throw Error("spline degree p must lie in [2, " + std::to_string(kMaxDegree) + "]");
        if (discretization.airy_degree() < 2 || discretization.airy_degree() > kMaxDegree)
            throw Error("p_airy out of range");
        if (!(discretization.h > 0.0)) throw Error("cell size h must be positive");
        if (discretization.quad_depth < 0) throw Error("quad_depth must be non-negative");
        if (solver.modes < 1) throw Error("solver.modes must be at least 1");
        static const std::vector<std::string> types{"lateral", "uniform", "pressure"};
        if (std::find(types.begin(), types.end(), load.type) == types.end())
            throw Error("unknown load type '" + load.type + "'");
        static const std::vector<std::string> sources{"auto", "analytic", "airy"};
        if (std::find(sources.begin(), sources.end(), load.stress_source) == sources.end())
            throw Error("unknown stress_source '" + load.stress_source + "'");
        if (load.pressures.size() > holes.size() + 1) throw Error("more pressures than boundaries");
        if (output.field_spacing < 0.0) throw Error("field_spacing must be non-negative");
    }
};

// ---------------------------------------------------------------------------
// json

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw Error(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw Error("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
    }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error("bad value for '" + where + "." + key + "'");
    }
}

inline Vec2 to_vec(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(where + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline void read_vec(const Json& j, const char* key, Vec2& out, const std::string& where) {
    if (j.contains(key)) out = to_vec(j.at(key), where + "." + key);
}

inline Json vec_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

}  // namespace detail

inline Json to_json(const CaseConfig& c) {
    using detail::vec_json;
    Json outer{{"shape", c.outer.shape}};
    if (c.outer.shape == "circle") {
        outer["center"] = vec_json(c.outer.center);
        outer["radius"] = c.outer.radius;
    } else if (c.outer.shape == "rectangle") {
        outer["center"] = vec_json(c.outer.center);
        outer["width"] = c.outer.width;
        outer["height"] = c.outer.height;
        outer["angle_deg"] = c.outer.angle_deg;
    } else {
        Json v = Json::array();
        for (const auto& p : c.outer.vertices) v.push_back(vec_json(p));
        outer["vertices"] = v;
    }
    outer["bc"] = c.outer.bc;
    Json holes = Json::array();
    for (const auto& h : c.holes) holes.push_back({{"center", vec_json(h.center)}, {"radius", h.radius}, {"bc", h.bc}});
    Json stiff = Json::array();
    for (const auto& s : c.stiffeners)
        stiff.push_back({{"a", vec_json(s.a)}, {"b", vec_json(s.b)}, {"EI", s.EI}, {"r0", s.r0}, {"zeta0", s.zeta0}, {"Ts", s.Ts}});
    const auto& L = c.load;
    const auto& D = c.discretization;
    return Json{
        {"case", c.id},
        {"description", c.description},
        {"domain", {{"outer", outer}, {"holes", holes}}},
        {"material", {{"D", c.material.D}, {"nu", c.material.nu}, {"E", c.material.E}, {"thickness", c.material.thickness}}},
        {"stiffeners", stiff},
        {"load",
         {{"type", L.type}, {"p0", L.p0}, {"sxx", L.sxx}, {"syy", L.syy}, {"sxy", L.sxy}, {"pressures", L.pressures},
          {"stress_source", L.stress_source}}},
        {"discretization",
         {{"p", D.p}, {"h", D.h}, {"quad_order", D.quad_order}, {"quad_depth", D.quad_depth}, {"p_airy", D.airy_degree()}}},
        {"solver", {{"modes", c.solver.modes}}},
        {"report", {{"k_length", c.report.k_length}, {"k_pi_squared", c.report.k_pi_squared}}},
        {"output", {{"summary", c.output.summary}, {"field", c.output.field}, {"field_spacing", c.output.field_spacing}}},
    };
}

/// Strict parse; every key must be known. Missing keys keep the values already in `base`.
inline CaseConfig from_json(const Json& j, CaseConfig base = {}) {
    using namespace detail;
    CaseConfig c = std::move(base);
    check_keys(j, {"case", "description", "domain", "material", "stiffeners", "load", "discretization", "solver", "report", "output"}, "");
    read(j, "case", c.id, "");
    read(j, "description", c.description, "");
    if (j.contains("domain")) {
        const Json& d = j.at("domain");
        check_keys(d, {"outer", "holes"}, "domain");
        if (d.contains("outer")) {
            const Json& o = d.at("outer");
            check_keys(o, {"shape", "center", "radius", "width", "height", "angle_deg", "vertices", "bc"}, "domain.outer");
            read(o, "shape", c.outer.shape, "domain.outer");
            read_vec(o, "center", c.outer.center, "domain.outer");
            read(o, "radius", c.outer.radius, "domain.outer");
            read(o, "width", c.outer.width, "domain.outer");
            read(o, "height", c.outer.height, "domain.outer");
            read(o, "angle_deg", c.outer.angle_deg, "domain.outer");
            read(o, "bc", c.outer.bc, "domain.outer");
            if (o.contains("vertices")) {
                if (!o.at("vertices").is_array()) throw Error("domain.outer.vertices: expected an array");
                c.outer.vertices.clear();
                for (const auto& v : o.at("vertices")) c.outer.vertices.push_back(to_vec(v, "domain.outer.vertices"));
            }
        }
        if (d.contains("holes")) {
            if (!d.at("holes").is_array()) throw Error("domain.holes: expected an array");
            c.holes.clear();
            for (const auto& hj : d.at("holes")) {
                check_keys(hj, {"center", "radius", "bc"}, "domain.holes[]");
                HoleConfig h;
                read_vec(hj, "center", h.center, "domain.holes[]");
                read(hj, "radius", h.radius, "domain.holes[]");
                read(hj, "bc", h.bc, "domain.holes[]");
                c.holes.push_back(h);
            }
        }
    }
    if (j.contains("material")) {
        const Json& m = j.at("material");
        check_keys(m, {"D", "nu", "E", "thickness"}, "material");
        read(m, "D", c.material.D, "material");
        read(m, "nu", c.material.nu, "material");
        read(m, "E", c.material.E, "material");
        read(m, "thickness", c.material.thickness, "material");
    }
    if (j.contains("stiffeners")) {
        if (!j.at("stiffeners").is_array()) throw Error("stiffeners: expected an array");
        c.stiffeners.clear();
        for (const auto& sj : j.at("stiffeners")) {
            check_keys(sj, {"a", "b", "EI", "r0", "zeta0", "Ts"}, "stiffeners[]");
            Stiffener s;
            read_vec(sj, "a", s.a, "stiffeners[]");
            read_vec(sj, "b", s.b, "stiffeners[]");
            read(sj, "EI", s.EI, "stiffeners[]");
            read(sj, "r0", s.r0, "stiffeners[]");
            read(sj, "zeta0", s.zeta0, "stiffeners[]");
            read(sj, "Ts", s.Ts, "stiffeners[]");
            c.stiffeners.push_back(s);
        }
    }
    if (j.contains("load")) {
        const Json& l = j.at("load");
        check_keys(l, {"type", "p0", "sxx", "syy", "sxy", "pressures", "stress_source"}, "load");
        read(l, "type", c.load.type, "load");
        read(l, "p0", c.load.p0, "load");
        read(l, "sxx", c.load.sxx, "load");
        read(l, "syy", c.load.syy, "load");
        read(l, "sxy", c.load.sxy, "load");
        read(l, "pressures", c.load.pressures, "load");
        read(l, "stress_source", c.load.stress_source, "load");
    }
    if (j.contains("discretization")) {
        const Json& d = j.at("discretization");
        check_keys(d, {"p", "h", "quad_order", "quad_depth", "p_airy"}, "discretization");
        read(d, "p", c.discretization.p, "discretization");
        read(d, "h", c.discretization.h, "discretization");
        read(d, "quad_order", c.discretization.quad_order, "discretization");
        read(d, "quad_depth", c.discretization.quad_depth, "discretization");
        read(d, "p_airy", c.discretization.p_airy, "discretization");
    }
    if (j.contains("solver")) {
        check_keys(j.at("solver"), {"modes"}, "solver");
        read(j.at("solver"), "modes", c.solver.modes, "solver");
    }
    if (j.contains("report")) {
        check_keys(j.at("report"), {"k_length", "k_pi_squared"}, "report");
        read(j.at("report"), "k_length", c.report.k_length, "report");
        read(j.at("report"), "k_pi_squared", c.report.k_pi_squared, "report");
    }
    if (j.contains("output")) {
        const Json& o = j.at("output");
        check_keys(o, {"summary", "field", "field_spacing"}, "output");
        read(o, "summary", c.output.summary, "output");
        read(o, "field", c.output.field, "output");
        read(o, "field_spacing", c.output.field_spacing, "output");
    }
    return c;
}

// ---------------------------------------------------------------------------
// registry

namespace cases {

inline std::vector<Vec2> pentagon(bool convex) {
    return {convex ? Vec2(2, -4) : Vec2(0.5, 0), Vec2(5, 3), Vec2(3, 8), Vec2(-3.5, 6), Vec2(-5, -8)};
}

inline CaseConfig annulus(double a, double b) {
    CaseConfig c;
    c.outer.shape = "circle";
    c.outer.radius = b;
    c.outer.bc = "clamped";
    c.holes.push_back(HoleConfig{Vec2(0, 0), a, "free"});
    return c;
}

inline CaseConfig annular_bend() {
    CaseConfig c = annulus(0.5345, 1.5432);
    c.id = "annular-bend";
    c.description = "annulus, clamped outer, free inner, constant lateral load";
    c.material.D = 1.234;
    c.load.p0 = 1.74586;
    c.discretization = {3, 0.1, 0, 6, 0};
    return c;
}

inline std::string ratio_tag(double r) {
    std::string s = nlohmann::json(r).dump();
    return s;
}

inline CaseConfig annular_buckle(double ratio) {
    const double b = 2.28;
    CaseConfig c = annulus(ratio * b, b);
    c.id = "annular-buckle-" + ratio_tag(ratio);
    c.description = "annulus buckling under outer radial compression, a/b = " + ratio_tag(ratio);
    c.load.type = "pressure";
    c.load.pressures = {1.0, 0.0};
    c.discretization = {3, 0.1, 0, 6, 0};
    c.report.k_length = b;
    return c;
}

/// 5 x 1 simply supported plate with a centre-line stiffener, rotated by phi.
inline CaseConfig rect_stiffener_bend(double phi_deg) {
    CaseConfig c;
    const double a = 5.0, b = 1.0, t = phi_deg * std::numbers::pi / 180.0;
    c.id = "rect-stiffener-bend-" + std::to_string(static_cast<int>(phi_deg)) + "deg";
    c.description = "rotated rectangle with centre-line stiffener, constant lateral load";
    c.outer = OuterConfig{"rectangle", Vec2(0, 0), 1.0, a, b, phi_deg, {}, "simply_supported"};
    c.material.D = 1.234;
    Stiffener s;
    s.a = Vec2(-0.5 * a * std::cos(t), -0.5 * a * std::sin(t));
    s.b = -s.a;
    s.EI = 150.0;
    c.stiffeners.push_back(s);
    c.load.p0 = 1.543;
    c.discretization = {3, 0.1, 0, 6, 0};
    return c;
}

/// Length-to-width 5/2, stiffener to plate area ratio 1/2, stiffness ratio EI/(bD) = 5.
inline CaseConfig rect_stiffener_buckle() {
    CaseConfig c;
    const double b = 1.0, a = 2.5 * b, delta = 0.5, gamma = 5.0;
    c.id = "rect-stiffener-buckle";
    c.description = "simply supported rectangle, centre-line stiffener, uniaxial compression";
    c.outer = OuterConfig{"rectangle", Vec2(0, 0), 1.0, a, b, 0.0, {}, "simply_supported"};
    Stiffener s;
    s.a = Vec2(-0.5 * a, 0.0);
    s.b = Vec2(0.5 * a, 0.0);
    s.EI = gamma * b * c.material.D;
    s.Ts = delta * b;
    c.stiffeners.push_back(s);
    c.load.type = "uniform";
    c.load.sxx = -1.0;
    c.discretization = {3, 0.1, 0, 6, 0};
    c.report = {b, true};
    return c;
}

inline Stiffener diagonal_stiffener(double a, double EI) {
    Stiffener s;
    s.a = Vec2(-0.17 * a, -0.5 * a);
    s.b = Vec2(0.5 * a, 0.28 * a);
    s.EI = EI;
    return s;
}

inline CaseConfig square_diagonal_bend() {
    CaseConfig c;
    const double a = 2.0;
    c.id = "square-diagonal-stiffener-bend";
    c.description = "simply supported square with oblique stiffener, constant lateral load";
    c.outer = OuterConfig{"rectangle", Vec2(0, 0), 1.0, a, a, 0.0, {}, "simply_supported"};
    c.material.D = 1.234;
    c.stiffeners.push_back(diagonal_stiffener(a, 150.0));
    c.load.p0 = 1.543;
    c.discretization = {3, 0.1, 0, 6, 0};
    return c;
}

inline CaseConfig square_diagonal_buckle(const std::string& bc) {
    CaseConfig c;
    const double a = 2.0;
    c.id = std::string("square-diagonal-stiffener-buckle-") + (bc == "clamped" ? "clamped" : "ss");
    c.description = "square with oblique stiffener (EI = 0 by default), uniaxial compression, " + bc;
    c.outer = OuterConfig{"rectangle", Vec2(0, 0), 1.0, a, a, 0.0, {}, bc};
    c.stiffeners.push_back(diagonal_stiffener(a, 0.0));
    c.load.type = "uniform";
    c.load.sxx = -1.0;
    c.discretization = {3, 0.1, 0, 6, 0};
    c.report = {a, true};
    return c;
}

inline CaseConfig rect_hole(bool uniaxial) {
    CaseConfig c;
    c.outer = OuterConfig{"rectangle", Vec2(0, 0), 1.0, 4.0, 2.0, 0.0, {}, "free"};
    c.holes.push_back(HoleConfig{Vec2(0, 0), 0.5, "free"});
    if (uniaxial) {
        c.id = "rect-hole-stress-uniaxial";
        c.description = "4 x 2 plate with central hole, unit tension on the short edges";
        c.load.type = "uniform";
        c.load.sxx = 1.0;
        c.discretization = {3, 0.1, 0, 6, 3};
    } else {
        c.id = "rect-hole-stress-uniform";
        c.description = "4 x 2 plate with central hole, unit normal compression on every boundary";
        c.load.type = "pressure";
        c.load.pressures = {1.0, 1.0};
        c.discretization = {3, 0.1, 0, 6, 5};
    }
    c.load.stress_source = "airy";
    return c;
}

inline CaseConfig square_hole_buckle(double d_over_a = 0.5) {
    CaseConfig c;
    const double a = 2.0;
    c.id = "square-hole-buckle";
    c.description = "simply supported square with free central hole, uniaxial compression";
    c.outer = OuterConfig{"rectangle", Vec2(0, 0), 1.0, a, a, 0.0, {}, "simply_supported"};
    c.holes.push_back(HoleConfig{Vec2(0, 0), 0.5 * d_over_a * a, "free"});
    c.load.type = "uniform";
    c.load.sxx = -1.0;
    c.discretization = {3, 0.1, 0, 6, 5};
    c.report = {a, true};
    return c;
}

inline CaseConfig polygon(bool convex, bool buckle) {
    CaseConfig c;
    const std::string shape = convex ? "convex" : "nonconvex";
    c.id = shape + "-polygon-" + (buckle ? "buckle" : "bend");
    c.description = std::string(convex ? "convex" : "non-convex") + " pentagon with two free holes, clamped, " +
                    (buckle ? "outer normal compression" : "constant lateral load");
    c.outer.shape = "polygon";
    c.outer.vertices = pentagon(convex);
    c.outer.bc = "clamped";
    c.holes.push_back(HoleConfig{Vec2(-1.7, 0.7), 0.91, "free"});
    c.holes.push_back(HoleConfig{Vec2(1.3, 4.05), 1.1, "free"});
    if (buckle) {
        c.load.type = "pressure";
        c.load.pressures = {1.0, 0.0, 0.0};
        c.discretization = {3, 0.15, 0, 6, 5};
    } else {
        c.load.p0 = 1.234;
        c.discretization = {3, 0.15, 0, 6, 0};
    }
    return c;
}

inline const std::vector<double>& annular_ratios() {
    static const std::vector<double> r{0.2, 0.525, 0.58, 0.62, 0.68};
    return r;
}

}  // namespace cases

inline std::vector<CaseConfig> registered_cases() {
    std::vector<CaseConfig> out;
    out.push_back(cases::annular_bend());
    for (double r : cases::annular_ratios()) out.push_back(cases::annular_buckle(r));
    out.push_back(cases::rect_stiffener_bend(0.0));
    out.push_back(cases::rect_stiffener_bend(10.0));
    out.push_back(cases::rect_stiffener_buckle());
    out.push_back(cases::square_diagonal_bend());
    out.push_back(cases::square_diagonal_buckle("simply_supported"));
    out.push_back(cases::square_diagonal_buckle("clamped"));
    out.push_back(cases::rect_hole(false));
    out.push_back(cases::rect_hole(true));
    out.push_back(cases::square_hole_buckle());
    for (bool convex : {true, false})
        for (bool buckle : {false, true}) out.push_back(cases::polygon(convex, buckle));
    return out;
}

inline CaseConfig registered_case(const std::string& id) {
    for (auto& c : registered_cases())
        if (c.id == id) return c;
    throw Error("unknown case '" + id + "' (see list-cases)");
}

/// A config document: an optional "case" key picks a registered preset that the other keys override.
inline CaseConfig parse_config(const Json& j) {
    CaseConfig base;
    if (j.is_object() && j.contains("case") && j.at("case").is_string()) {
        const std::string id = j.at("case").get<std::string>();
        for (auto& c : registered_cases())
            if (c.id == id) base = c;
    }
    CaseConfig c = from_json(j, base);
    c.validate();
    return c;
}

}  // namespace webplate
