#pragma once

#include "webplate/cases.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace webplate {

/// Deflection of the annulus a < r < b, clamped at b, free at a, under constant load p0.
/// w = c0 + c1 log r + c2 r^2 log r + c3 r^2 + p0 r^4 / (64 D); constants from the four boundary conditions.
class AnnulusBendingSolution {
public:
    AnnulusBendingSolution(double a, double b, double D, double nu, double p0) : D_(D), p0_(p0) {
        // columns: 1, log r, r^2 log r, r^2
        auto w = [](double r) { return Eigen::RowVector4d(1.0, std::log(r), r * r * std::log(r), r * r); };
        auto w1 = [](double r) { return Eigen::RowVector4d(0.0, 1.0 / r, 2.0 * r * std::log(r) + r, 2.0 * r); };
        auto w2 = [](double r) { return Eigen::RowVector4d(0.0, -1.0 / (r * r), 2.0 * std::log(r) + 3.0, 2.0); };
        auto lap1 = [](double r) { return Eigen::RowVector4d(0.0, 0.0, 4.0 / r, 0.0); };
        const double q = p0 / D;
        Eigen::Matrix4d M;
        Eigen::Vector4d rhs;
        M.row(0) = w(b);
        rhs[0] = -q * std::pow(b, 4) / 64.0;
        M.row(1) = w1(b);
        rhs[1] = -q * std::pow(b, 3) / 16.0;
        M.row(2) = w2(a) + nu * w1(a) / a;  // radial moment
        rhs[2] = -(3.0 * q * a * a / 16.0 + nu * q * a * a / 16.0);
        M.row(3) = lap1(a);  // shear force
        rhs[3] = -q * a / 2.0;
        c_ = M.fullPivLu().solve(rhs);
    }

    [[nodiscard]] double operator()(double r) const {
        return c_[0] + c_[1] * std::log(r) + c_[2] * r * r * std::log(r) + c_[3] * r * r + p0_ * std::pow(r, 4) / (64.0 * D_);
    }
    [[nodiscard]] const Eigen::Vector4d& constants() const { return c_; }

private:
    double D_, p0_;
    Eigen::Vector4d c_;
};

// ---------------------------------------------------------------------------
// pre-buckling stress

struct StressResult {
    StressField field;
    std::shared_ptr<const AirySolution> airy;  // set when solved numerically
};

namespace detail {

inline std::vector<double> boundary_pressures(const CaseConfig& c) {
    std::vector<double> p(c.holes.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.load.pressures.size(); ++i) p[i] = c.load.pressures[i];
    return p;
}

/// Closed-form stress when one is known for this load and geometry.
inline std::optional<StressField> analytic_stress(const CaseConfig& c) {
    if (c.load.type == "uniform") {
        if (!c.holes.empty()) return std::nullopt;
        return StressField::constant(c.load.sxx, c.load.syy, c.load.sxy);
    }
    if (c.load.type != "pressure") return std::nullopt;
    const std::vector<double> p = boundary_pressures(c);
    bool equal = true;
    for (double v : p) equal = equal && v == p[0];
    if (equal) return StressField::constant(-p[0], -p[0], 0.0);
    const DomainSpec d = c.domain();
    if (d.outer_is_circle() && d.holes.size() == 1 && p[1] == 0.0 &&
        (d.holes[0].circle.center - d.outer_circle().center).norm() == 0.0) {
        const StressField unit = StressField::annulus_compression(d.outer_circle().center, d.holes[0].circle.radius,
                                                                  d.outer_circle().radius);
        const double s = p[0];
        return StressField([unit, s](const Vec2& x) {
            const StressState u = unit(x);
            return StressState{s * u.xx, s * u.yy, s * u.xy};
        }, "analytic");
    }
    return std::nullopt;
}

inline std::vector<TractionBC> traction_conditions(const CaseConfig& c) {
    std::vector<TractionBC> bcs;
    if (c.load.type == "uniform") {
        bcs.push_back(TractionBC::uniform_stress(c.load.sxx, c.load.syy, c.load.sxy));
        for (std::size_t i = 0; i < c.holes.size(); ++i) bcs.push_back(TractionBC::free());
    } else if (c.load.type == "pressure") {
        for (double p : boundary_pressures(c)) bcs.push_back(TractionBC::normal_pressure(p));
    } else {
        throw Error("case has no in-plane load (load.type must be 'uniform' or 'pressure')");
    }
    return bcs;
}

}  // namespace detail

inline std::shared_ptr<const AirySolution> solve_case_airy(const CaseConfig& c) {
    AiryOptions opt;
    opt.degree = c.discretization.airy_degree();
    opt.quad = c.quad();
    return std::make_shared<const AirySolution>(
        solve_airy(c.domain(), detail::traction_conditions(c), c.discretization.h, opt));
}

inline StressResult prebuckling_stress(const CaseConfig& c) {
    detail::traction_conditions(c);  // rejects lateral loads
    const std::string& src = c.load.stress_source;
    if (src != "airy") {
        if (auto s = detail::analytic_stress(c)) return {*s, nullptr};
        if (src == "analytic") throw Error("no closed-form stress for this case; use stress_source 'airy'");
    }
    auto airy = solve_case_airy(c);
    return {to_stress_field(airy), airy};
}

// ---------------------------------------------------------------------------
// pipelines

struct BendReport {
    BendingSolution solution;
    int unknowns = 0;
    double max_deflection = 0.0;  // over the fixed sample set
    Vec2 argmax{0.0, 0.0};
};

struct BuckleReport {
    BucklingSolution solution;
    int unknowns = 0;
    double lambda = 0.0;
    std::optional<double> K;
    std::string stress_provenance;
};

struct StressReport {
    std::shared_ptr<const AirySolution> airy;
    int unknowns = 0;
    std::array<double, 3> max_abs{0.0, 0.0, 0.0};  // xx, yy, xy over the sample set
    std::optional<double> analytic_error;
};

inline constexpr int kSampleCount = 2000;

inline std::vector<Vec2> sample_points(const DomainSpec& d) { return halton_interior_points(d, kSampleCount); }

inline DiscreteSystem plate_system(const CaseConfig& c, bool lateral) {
    const DomainSpec d = c.domain();
    const Discretization disc = Discretization::build(d, plate_weight(d), c.discretization.h, c.discretization.p, c.quad());
    DiscreteSystem sys;
    sys.basis = disc.basis;
    sys.A = assemble_bending(disc, c.material, c.stiffeners);
    if (lateral) sys.b = assemble_load(disc, c.load.p0);
    return sys;
}

inline BendReport run_bend(const CaseConfig& c) {
    c.validate();
    if (c.load.type != "lateral") throw Error("bend needs load.type 'lateral'");
    const DiscreteSystem sys = plate_system(c, true);
    BendReport r;
    r.solution = solve_bending(sys);
    r.unknowns = sys.basis->size();
    for (const Vec2& x : sample_points(c.domain())) {
        const double w = std::abs(r.solution.field.eval(x).v);
        if (w > r.max_deflection) {
            r.max_deflection = w;
            r.argmax = x;
        }
    }
    return r;
}

inline BuckleReport run_buckle(const CaseConfig& c) {
    c.validate();
    const StressResult stress = prebuckling_stress(c);
    const DomainSpec d = c.domain();
    const Discretization disc = Discretization::build(d, plate_weight(d), c.discretization.h, c.discretization.p, c.quad());
    DiscreteSystem sys;
    sys.basis = disc.basis;
    sys.A = assemble_bending(disc, c.material, c.stiffeners);
    sys.B = assemble_geometric(disc, stress.field, c.stiffeners);
    BuckleReport r;
    r.solution = solve_buckling(sys, c.solver.modes);
    r.unknowns = sys.basis->size();
    r.lambda = r.solution.lambda;
    r.stress_provenance = stress.field.provenance();
    if (c.report.k_length > 0.0) {
        double k = r.lambda * c.report.k_length * c.report.k_length / c.material.D;
        if (c.report.k_pi_squared) k /= std::numbers::pi * std::numbers::pi;
        r.K = k;
    }
    return r;
}

inline StressReport run_stress(const CaseConfig& c) {
    c.validate();
    StressReport r;
    r.airy = solve_case_airy(c);
    r.unknowns = r.airy->basis()->size();
    const auto exact = detail::analytic_stress(c);
    double err = 0.0;
    for (const Vec2& x : sample_points(c.domain())) {
        const StressState s = r.airy->stress(x);
        r.max_abs[0] = std::max(r.max_abs[0], std::abs(s.xx));
        r.max_abs[1] = std::max(r.max_abs[1], std::abs(s.yy));
        r.max_abs[2] = std::max(r.max_abs[2], std::abs(s.xy));
        if (exact) {
            const StressState e = (*exact)(x);
            err = std::max({err, std::abs(s.xx - e.xx), std::abs(s.yy - e.yy), std::abs(s.xy - e.xy)});
        }
    }
    if (exact) r.analytic_error = err;
    return r;
}

// ---------------------------------------------------------------------------
// output

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Regular grid of spacing `spacing` over the bounding box, points outside the domain dropped,
/// rows ordered by y then x.
inline std::vector<Vec2> field_points(const DomainSpec& d, double spacing) {
    if (!(spacing > 0.0)) throw Error("field spacing must be positive");
    const Box b = d.bounding_box();
    const int nx = static_cast<int>(std::floor(b.width() / spacing + 1e-9));
    const int ny = static_cast<int>(std::floor(b.height() / spacing + 1e-9));
    std::vector<Vec2> out;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const Vec2 x = b.lo + spacing * Vec2(i, j);
            if (d.contains(x)) out.push_back(x);
        }
    return out;
}

inline void emit_field(std::ostream& os, const DomainSpec& d, double spacing, const std::string& name,
                       const std::function<double(const Vec2&)>& value) {
    os << "x,y," << name << "\n";
    for (const Vec2& x : field_points(d, spacing)) os << fmt17(x.x()) << ',' << fmt17(x.y()) << ',' << fmt17(value(x)) << "\n";
}

inline void emit_stress_field(std::ostream& os, const AirySolution& sol, double spacing) {
    os << "x,y,sxx,syy,sxy\n";
    for (const Vec2& x : field_points(sol.domain(), spacing)) {
        const StressState s = sol.stress(x);
        os << fmt17(x.x()) << ',' << fmt17(x.y()) << ',' << fmt17(s.xx) << ',' << fmt17(s.yy) << ',' << fmt17(s.xy) << "\n";
    }
}

struct FieldRow {
    double x, y, value;
};

inline std::vector<FieldRow> read_field(std::istream& is) {
    std::string line;
    std::getline(is, line);
    std::vector<FieldRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        FieldRow r{};
        char c1 = 0, c2 = 0;
        if (!(ls >> r.x >> c1 >> r.y >> c2 >> r.value) || c1 != ',' || c2 != ',') throw Error("malformed field row: " + line);
        rows.push_back(r);
    }
    return rows;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
}

// ---------------------------------------------------------------------------
// convergence

enum class Quantity { Deflection, Stress };

struct ConvergenceRow {
    double h = 0.0;
    double error = 0.0;
    std::optional<double> order;  // w.r.t. the previous row
    int unknowns = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::string reference;  // "analytic" or "fine-grid h=..."

    [[nodiscard]] double last_order() const {
        if (rows.size() < 2 || !rows.back().order) throw Error("convergence report needs two rows");
        return *rows.back().order;
    }
};

inline bool annulus_bending_is_analytic(const CaseConfig& c) {
    const DomainSpec d = c.domain();
    return c.load.type == "lateral" && c.stiffeners.empty() && d.outer_is_circle() && d.holes.size() == 1 &&
           d.outer_bc == BoundaryCondition::Clamped && d.holes[0].bc == BoundaryCondition::Free &&
           d.holes[0].circle.center == d.outer_circle().center;
}

/// Errors in the max norm over the fixed sample set. `h_list` must be strictly decreasing.
inline ConvergenceReport run_convergence(const CaseConfig& base, const std::vector<double>& h_list, Quantity q) {
    if (h_list.size() < 2) throw Error("convergence needs at least two cell sizes");
    for (std::size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1])) throw Error("cell sizes must be strictly decreasing");
    const DomainSpec dom = base.domain();
    const std::vector<Vec2> pts = sample_points(dom);
    auto with_h = [&](double h) {
        CaseConfig c = base;
        c.discretization.h = h;
        return c;
    };

    ConvergenceReport rep;
    std::vector<std::vector<double>> ref;  // per point: value (deflection) or 3 stress components
    auto sample = [&](const CaseConfig& c, int& unknowns) {
        std::vector<std::vector<double>> v(pts.size());
        if (q == Quantity::Deflection) {
            const BendReport r = run_bend(c);
            unknowns = r.unknowns;
            for (std::size_t k = 0; k < pts.size(); ++k) v[k] = {r.solution.field.eval(pts[k]).v};
        } else {
            const auto airy = solve_case_airy(c);
            unknowns = airy->basis()->size();
            for (std::size_t k = 0; k < pts.size(); ++k) {
                const StressState s = airy->stress(pts[k]);
                v[k] = {s.xx, s.yy, s.xy};
            }
        }
        return v;
    };

    std::optional<StressField> exact_stress;
    if (q == Quantity::Stress) exact_stress = detail::analytic_stress(base);
    if (q == Quantity::Deflection && annulus_bending_is_analytic(base)) {
        const AnnulusBendingSolution w(dom.holes[0].circle.radius, dom.outer_circle().radius, base.material.D,
                                       base.material.nu, base.load.p0);
        for (const Vec2& x : pts) ref.push_back({w((x - dom.outer_circle().center).norm())});
        rep.reference = "analytic";
    } else if (exact_stress) {
        for (const Vec2& x : pts) {
            const StressState s = (*exact_stress)(x);
            ref.push_back({s.xx, s.yy, s.xy});
        }
        rep.reference = "analytic";
    } else {
        const double href = h_list.back() / 4.0;
        int n = 0;
        try {
            ref = sample(with_h(href), n);
        } catch (const Error& e) {
            throw Error("reference run at h=" + fmt17(href) + " failed: " + e.what());
        }
        rep.reference = "fine-grid h=" + fmt17(href);
    }

    for (double h : h_list) {
        ConvergenceRow row;
        row.h = h;
        const auto v = sample(with_h(h), row.unknowns);
        for (std::size_t k = 0; k < pts.size(); ++k)
            for (std::size_t m = 0; m < v[k].size(); ++m) row.error = std::max(row.error, std::abs(v[k][m] - ref[k][m]));
        if (!rep.rows.empty()) {
            const ConvergenceRow& prev = rep.rows.back();
            row.order = std::log(prev.error / row.error) / std::log(prev.h / h);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

inline std::string convergence_csv(const ConvergenceReport& r, const CaseConfig& c) {
    std::ostringstream os;
    os << "# reference: " << r.reference << "\n# config: " << to_json(c).dump() << "\nh,error,order,unknowns\n";
    for (const auto& row : r.rows)
        os << fmt17(row.h) << ',' << fmt17(row.error) << ',' << (row.order ? fmt17(*row.order) : "") << ',' << row.unknowns << "\n";
    return os.str();
}

}  // namespace webplate
