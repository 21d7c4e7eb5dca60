// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "webplate/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

using namespace webplate;

namespace {

int failures = 0;

void verdict(bool ok, const std::string& id, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string num(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

/// Mean order over the whole list: log(e_first / e_last) / log(h_first / h_last).
double mean_order(const ConvergenceReport& r) {
    return std::log(r.rows.front().error / r.rows.back().error) / std::log(r.rows.front().h / r.rows.back().h);
}

std::string describe(const ConvergenceReport& r) {
    std::string s = "errors";
    for (const auto& row : r.rows) s += " " + num(row.error, 3) + "@" + num(row.h, 3);
    s += "; pairwise orders";
    for (const auto& row : r.rows)
        if (row.order) s += " " + num(*row.order, 3);
    return s + "; mean order " + num(mean_order(r), 3) + " (" + r.reference + ")";
}

double buckle_K(CaseConfig c, double h) {
    c.discretization.h = h;
    return *run_buckle(c).K;
}

void criteria_1_2() {
    const std::vector<double> ref{13.6039, 27.9015, 31.7149, 34.9927, 41.1081};
    const auto& ratios = cases::annular_ratios();
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const CaseConfig c = cases::annular_buckle(ratios[i]);
        const double k1 = buckle_K(c, 0.1), k2 = buckle_K(c, 0.2);
        const double rel = std::abs(k1 - ref[i]) / ref[i];
        verdict(rel <= 5e-3, "criterion 1 (a/b=" + num(ratios[i]) + ")",
                "K(h=0.1)=" + num(k1, 9) + " ref " + num(ref[i]) + " rel.dev " + num(rel, 3) + " (tol 5e-3)");
        const double agree = std::abs(k1 - k2) / std::abs(k1);
        verdict(agree <= 5e-4, "criterion 2 (a/b=" + num(ratios[i]) + ")",
                "K(h=0.2)=" + num(k2, 9) + " K(h=0.1)=" + num(k1, 9) + " rel.diff " + num(agree, 3) +
                    " (4 significant digits: <= 5e-4)");
    }
}

void criterion_3() {
    for (int p : {2, 3}) {
        CaseConfig c = cases::annular_bend();
        c.discretization.p = p;
        const ConvergenceReport r = run_convergence(c, {0.1, 0.05, 0.025, 0.0125}, Quantity::Deflection);
        const double o = mean_order(r);
        verdict(std::abs(o - (p + 1)) <= 0.4, "criterion 3 (p=" + std::to_string(p) + ")",
                describe(r) + "; expected " + std::to_string(p + 1) + " +- 0.4");
    }
}

void criterion_4() {
    struct Row {
        double phi;
        int p;
        double expect;
    };
    for (const Row& row : {Row{0.0, 3, 4.0}, Row{0.0, 5, 3.0}, Row{10.0, 3, 3.0}, Row{10.0, 5, 3.0}}) {
        CaseConfig c = cases::rect_stiffener_bend(row.phi);
        c.discretization.p = row.p;
        const ConvergenceReport r = run_convergence(c, {0.1, 0.05, 0.025}, Quantity::Deflection);
        const double o = mean_order(r);
        verdict(std::abs(o - row.expect) <= 0.5,
                "criterion 4 (phi=" + num(row.phi) + "deg, p=" + std::to_string(row.p) + ")",
                describe(r) + "; expected " + num(row.expect) + " +- 0.5");
    }
}

void criterion_5() {
    for (int pa : {3, 5}) {
        CaseConfig c = cases::rect_hole(false);
        c.discretization.p_airy = pa;
        const ConvergenceReport r = run_convergence(c, {0.2, 0.1, 0.05}, Quantity::Stress);
        const double o = mean_order(r);
        verdict(std::abs(o - (pa - 1)) <= 0.5, "criterion 5 order (p_airy=" + std::to_string(pa) + ")",
                describe(r) + "; expected " + std::to_string(pa - 1) + " +- 0.5");
        if (pa == 5) {
            const double e = r.rows.back().error;
            verdict(e < 1e-3, "criterion 5 accuracy (p_airy=5, h=0.05)", "max stress error " + num(e, 3) + " (< 1e-3)");
        }
    }
}

void criterion_6() {
    struct Row {
        bool convex;
        double ref, tol;
    };
    for (const Row& row : {Row{true, 0.5789, 0.01}, Row{false, 0.8516, 0.015}}) {
        const CaseConfig c = cases::polygon(row.convex, true);
        const BuckleReport r = run_buckle(c);
        const double v = r.lambda / c.material.D;
        const double rel = std::abs(v - row.ref) / row.ref;
        verdict(rel <= row.tol, std::string("criterion 6 (") + (row.convex ? "convex" : "non-convex") + ")",
                "lambda/D=" + num(v, 9) + " ref " + num(row.ref) + " rel.dev " + num(rel, 3) + " (tol " + num(row.tol) +
                    "), " + std::to_string(r.unknowns) + " unknowns");
    }
}

void criterion_7() {
    struct Row {
        std::string bc;
        double ref, tol;
    };
    for (const Row& row : {Row{"simply_supported", 4.0, 0.02}, Row{"clamped", 9.4, 0.03}}) {
        const CaseConfig c = cases::square_diagonal_buckle(row.bc);
        const double k = *run_buckle(c).K;
        const double rel = std::abs(k - row.ref) / row.ref;
        verdict(rel <= row.tol, "criterion 7 (" + row.bc + ", EI=0)",
                "K=" + num(k, 9) + " ref " + num(row.ref) + " rel.dev " + num(rel, 3) + " (tol " + num(row.tol) + ")");
    }
}

// ---------------------------------------------------------------------------
// criterion 8

double property_h(const CaseConfig& c) {
    const Box b = c.domain().bounding_box();
    return std::max(c.discretization.h, std::max(b.width(), b.height()) / 32.0);
}

/// In-plane load used for the stress and eigen checks: the case's own, else unit pressure everywhere.
CaseConfig with_inplane_load(CaseConfig c) {
    if (c.load.type == "lateral") {
        c.load.type = "pressure";
        c.load.pressures.assign(c.holes.size() + 1, 1.0);
    }
    return c;
}

double partition_of_unity(const WebBasis& basis, const std::vector<Vec2>& pts) {
    double worst = 0.0;
    for (const Vec2& x : pts) {
        double s = 0.0;
        for (const Index2& k : basis.relevant_indices()) s += basis.spline_jet(k, x).v;
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

/// Least-squares residual of weight * monomial, relative, worst over the monomials of degree <= p.
double polynomial_reproduction(const WebBasis& basis) {
    const DomainSpec& d = basis.domain();
    const auto pts = halton_interior_points(d, 3 * basis.size());
    Eigen::MatrixXd M(static_cast<Eigen::Index>(pts.size()), basis.size());
    for (std::size_t r = 0; r < pts.size(); ++r)
        for (int i = 0; i < basis.size(); ++i) M(static_cast<Eigen::Index>(r), i) = basis.eval(i, pts[r].x(), pts[r].y(), 0, 0);
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> qr(M);
    const Box b = d.bounding_box();
    const Vec2 c = b.center();
    const double s = 2.0 / std::max(b.width(), b.height());
    const int p = basis.degree();
    double worst = 0.0;
    for (int a = 0; a <= p; ++a)
        for (int e = 0; a + e <= p; ++e) {
            Eigen::VectorXd q(M.rows());
            for (std::size_t r = 0; r < pts.size(); ++r) {
                const Vec2 x = s * (pts[r] - c);
                q[static_cast<Eigen::Index>(r)] = basis.weight().value(pts[r]) * (std::pow(x.x(), a) * std::pow(x.y(), e) + 0.5);
            }
            const Eigen::VectorXd u = qr.solve(q);
            worst = std::max(worst, (M * u - q).norm() / q.norm());
        }
    return worst;
}

/// Observed order of the biharmonic boundary extension of smooth data on the outer polygon.
/// Largest boundary mismatch at points that avoid the interpolation knots.
double off_knot_error(const SimplePolygon& poly, const EdgeData& data, const ExtensionFunction& ext) {
    const auto frames = build_edge_frames(poly);
    const int m = 997;
    double e = 0.0;
    for (int j = 0; j < poly.size(); ++j) {
        const EdgeFrame& f = frames[j];
        for (int k = 0; k < m; ++k) {
            const double s = f.length * (k + 0.3819660112501051) / m;
            const Jet u = ext.eval(f.point(s, 0.0));
            e = std::max({e, std::abs(u.v - data.value[j](s)[0]), std::abs(u.along(f.n) - data.normal[j](s)[0])});
        }
    }
    return e;
}

// Knot counts below the per-edge minimum are silently raised, so refine from that minimum.
double extension_order(const SimplePolygon& poly, int degree) {
    const Box b = poly.bounding_box();
    const double k = 24.0 / std::max(b.width(), b.height());
    auto f = [k](const Vec2& x) {
        const double s = std::sin(k * x.x()), c = std::cos(k * x.x()), sy = std::sin(0.7 * k * x.y()), cy = std::cos(0.7 * k * x.y());
        const double l = 0.7 * k;
        return Jet{s * cy, k * c * cy, -l * s * sy, -k * k * s * cy, -k * l * c * sy, -l * l * s * cy};
    };
    const EdgeData data = EdgeData::restrict(poly, f);
    ExtensionOptions opt;
    opt.degree = degree;
    opt.knots = 1;
    const auto kn = build_biharmonic_extension(poly, data, opt).knots();
    const int n0 = *std::max_element(kn.begin(), kn.end());
    std::vector<double> ev;
    for (int n : {n0, 2 * n0}) {
        opt.knots = n;
        ev.push_back(off_knot_error(poly, data, build_biharmonic_extension(poly, data, opt)));
    }
    return std::log2(ev[0] / ev[1]);
}

void criterion_8() {
    std::map<std::string, bool> ok;
    for (const CaseConfig& base : registered_cases()) {
        const std::string tag = "criterion 8 [" + base.id + "]";
        try {
            CaseConfig c = base;
            c.discretization.h = property_h(base);
            bool all_free = c.outer.bc == "free";
            for (const auto& hole : c.holes) all_free = all_free && hole.bc == "free";
            if (all_free) c.outer.bc = "simply_supported";  // the eigen check needs a supported plate
            const DomainSpec d = c.domain();
            const Discretization disc = Discretization::build(d, plate_weight(d), c.discretization.h, c.discretization.p, c.quad());
            const auto pts = sample_points(d);
            std::ostringstream s;
            bool pass = true;

            const double pu = partition_of_unity(*disc.basis, pts);
            pass = pass && pu < 1e-12;
            s << "unity " << num(pu, 2);

            const double pr = polynomial_reproduction(*disc.basis);
            pass = pass && pr < 1e-10;
            s << ", poly.repr " << num(pr, 2);

            const CaseConfig load = with_inplane_load(c);
            const auto airy = solve_case_airy(load);
            const AirySolution moved = airy->shifted(0.37, -1.3, 2.1);
            double gauge = 0.0, smax = 0.0;
            for (std::size_t k = 0; k < pts.size(); k += 4) {
                const StressState a = airy->stress(pts[k]), m = moved.stress(pts[k]);
                gauge = std::max({gauge, std::abs(a.xx - m.xx), std::abs(a.yy - m.yy), std::abs(a.xy - m.xy)});
                smax = std::max({smax, std::abs(a.xx), std::abs(a.yy)});
            }
            gauge /= std::max(smax, 1.0);
            pass = pass && gauge < 1e-10;
            s << ", gauge " << num(gauge, 2);

            DiscreteSystem sys;
            sys.basis = disc.basis;
            sys.A = assemble_bending(disc, c.material, c.stiffeners);
            sys.B = assemble_geometric(disc, to_stress_field(airy), c.stiffeners);
            const bool sym = sys.A.asymmetry() == 0.0 && sys.B.asymmetry() == 0.0;
            pass = pass && sym;
            s << ", symmetry " << (sym ? "exact" : "broken");

            const BucklingSolution bs = solve_buckling(sys);
            pass = pass && bs.residual < 1e-8;
            s << ", eigen.res " << num(bs.residual, 2);

            if (auto poly = d.outer_polygon()) {
                const int deg = airy_extension_degree(c.discretization.airy_degree());
                const double o = extension_order(*poly, deg);
                pass = pass && o >= deg + 1;
                s << ", ext.order " << num(o, 3) << " (>= " << deg + 1 << ")";
            } else {
                s << ", ext.order n/a (circular outer)";
            }
            s << ", h=" << num(c.discretization.h, 3);
            verdict(pass, tag, s.str());
        } catch (const std::exception& e) {
            verdict(false, tag, std::string("error: ") + e.what());
        }
    }
}

/// Hole-size trend and the small-hole limit, standing in for the full hole sweep.
void hole_sweep() {
    std::vector<double> K;
    const std::vector<double> ratios{0.2, 0.35, 0.5};
    std::string detail;
    for (double r : ratios) {
        K.push_back(*run_buckle(cases::square_hole_buckle(r)).K);
        detail += " K(" + num(r) + ")=" + num(K.back(), 6);
    }
    const bool down = K[0] > K[1] && K[1] > K[2], up = K[0] < K[1] && K[1] < K[2];
    verdict(down || up, "hole trend (h=0.1)", "monotone in d/a:" + detail);

    CaseConfig plain = cases::square_diagonal_buckle("simply_supported");
    plain.discretization.h = 0.05;
    const double k0 = *run_buckle(plain).K;
    std::vector<double> dev;
    std::string limit;
    for (double r : {0.1, 0.05}) {
        CaseConfig small = cases::square_hole_buckle(r);
        small.discretization.h = 0.05;
        const double ks = *run_buckle(small).K;
        dev.push_back(std::abs(ks - k0) / k0);
        limit += " K(" + num(r) + ")=" + num(ks, 6);
    }
    // same tolerance as the simply supported plate without hole
    verdict(dev[1] < dev[0] && dev[1] <= 0.02, "hole limit (d/a -> 0, h=0.05)",
            "plate without hole K=" + num(k0, 6) + limit + ", rel.dev " + num(dev[0], 3) + " -> " + num(dev[1], 3) + " (tol 0.02)");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    auto guarded = [](const char* name, void (*fn)()) {
        try {
            fn();
        } catch (const std::exception& e) {
            verdict(false, name, std::string("error: ") + e.what());
        }
    };
    guarded("criterion 1/2", criteria_1_2);
    guarded("criterion 3", criterion_3);
    guarded("criterion 4", criterion_4);
    guarded("criterion 5", criterion_5);
    guarded("criterion 6", criterion_6);
    guarded("criterion 7", criterion_7);
    guarded("criterion 8", criterion_8);
    guarded("hole sweep", hole_sweep);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d failing line(s), %.0f s\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
