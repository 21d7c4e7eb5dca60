#include "webplate/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace webplate;

TEST(Registry, CoversTheBenchmarkSet) {
    std::set<std::string> ids;
    for (const auto& c : registered_cases()) {
        EXPECT_TRUE(ids.insert(c.id).second) << c.id;
        EXPECT_NO_THROW(c.validate()) << c.id;
    }
    const std::set<std::string> expected{"annular-bend",
                                         "annular-buckle-0.2",
                                         "annular-buckle-0.525",
                                         "annular-buckle-0.58",
                                         "annular-buckle-0.62",
                                         "annular-buckle-0.68",
                                         "rect-stiffener-bend-0deg",
                                         "rect-stiffener-bend-10deg",
                                         "rect-stiffener-buckle",
                                         "square-diagonal-stiffener-bend",
                                         "square-diagonal-stiffener-buckle-ss",
                                         "square-diagonal-stiffener-buckle-clamped",
                                         "rect-hole-stress-uniform",
                                         "rect-hole-stress-uniaxial",
                                         "square-hole-buckle",
                                         "convex-polygon-bend",
                                         "convex-polygon-buckle",
                                         "nonconvex-polygon-bend",
                                         "nonconvex-polygon-buckle"};
    EXPECT_EQ(ids, expected);
}

TEST(Registry, PolygonVerticesAndHoles) {
    const CaseConfig c = registered_case("nonconvex-polygon-buckle");
    ASSERT_EQ(c.outer.vertices.size(), 5u);
    EXPECT_EQ(c.outer.vertices[0], Vec2(0.5, 0.0));
    EXPECT_EQ(c.outer.vertices[3], Vec2(-3.5, 6.0));
    ASSERT_EQ(c.holes.size(), 2u);
    EXPECT_EQ(c.holes[1].center, Vec2(1.3, 4.05));
    EXPECT_EQ(c.holes[1].radius, 1.1);
    EXPECT_EQ(registered_case("convex-polygon-bend").outer.vertices[0], Vec2(2.0, -4.0));
    EXPECT_THROW(registered_case("no-such-case"), Error);
}

TEST(Config, RoundTripIsIdentity) {
    for (const auto& c : registered_cases()) {
        const Json j = to_json(c);
        EXPECT_EQ(to_json(parse_config(j)), j) << c.id;
    }
}

TEST(Config, OverridesApplyOnTopOfPreset) {
    const CaseConfig c = parse_config(Json::parse(R"({"case": "annular-bend", "discretization": {"p": 5, "h": 0.2}})"));
    EXPECT_EQ(c.discretization.p, 5);
    EXPECT_EQ(c.discretization.h, 0.2);
    EXPECT_EQ(c.load.p0, 1.74586);
    EXPECT_EQ(c.material.D, 1.234);
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_THROW(parse_config(Json::parse(R"({"case": "annular-bend", "mesh": 1})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"discretization": {"p": 3, "hh": 0.1}})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"stiffeners": [{"a": [0, 0], "b": [0.1, 0], "EJ": 1}]})")), Error);
    try {
        parse_config(Json::parse(R"({"material": {"D": 1, "poisson": 0.3}})"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("material.poisson"), std::string::npos);
    }
}

TEST(Config, InfeasibleRejected) {
    EXPECT_THROW(parse_config(Json::parse(R"({"case": "rect-stiffener-bend-0deg", "stiffeners": [{"a": [0, 0], "b": [9, 0]}]})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"material": {"D": -1}})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"discretization": {"p": 12}})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"domain": {"outer": {"bc": "glued"}}})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"load": {"type": "wind"}})")), Error);
    EXPECT_THROW(parse_config(Json::parse(R"({"domain": {"outer": {"center": [1]}}})")), Error);
}

// Oracle: the constants must satisfy the four boundary conditions, checked by finite differences.
TEST(AnnulusOracle, SatisfiesBoundaryConditions) {
    const double a = 0.5345, b = 1.5432, D = 1.234, nu = 0.3, p0 = 1.74586;
    const AnnulusBendingSolution w(a, b, D, nu, p0);
    const double e = 1e-3;
    auto d1 = [&](double r) { return (w(r + e) - w(r - e)) / (2 * e); };
    auto d2 = [&](double r) { return (w(r + e) - 2 * w(r) + w(r - e)) / (e * e); };
    auto lap = [&](double r) { return d2(r) + d1(r) / r; };
    EXPECT_NEAR(w(b), 0.0, 1e-14);
    EXPECT_NEAR(d1(b), 0.0, 1e-6);
    EXPECT_NEAR(d2(a) + nu * d1(a) / a, 0.0, 1e-5);
    EXPECT_NEAR((lap(a + e) - lap(a - e)) / (2 * e), 0.0, 1e-4);
    // the biharmonic of the particular part balances the load
    const double r = 1.0;
    const double lap_r = lap(r);
    const double bilap = (lap(r + e) - 2 * lap_r + lap(r - e)) / (e * e) + (lap(r + e) - lap(r - e)) / (2 * e) / r;
    EXPECT_NEAR(bilap, p0 / D, 2e-3);
}

TEST(Pipeline, AnnulusBucklingCaseB) {
    const BuckleReport r = run_buckle(registered_case("annular-buckle-0.525"));
    ASSERT_TRUE(r.K.has_value());
    EXPECT_NEAR(*r.K, 27.9015, 27.9015 * 5e-3);
    EXPECT_EQ(r.stress_provenance, "analytic");
    EXPECT_LT(r.solution.residual, 1e-8);
}

TEST(Pipeline, DeterministicSummaries) {
    CaseConfig c = registered_case("square-hole-buckle");
    c.discretization.h = 0.2;
    const BuckleReport a = run_buckle(c), b = run_buckle(c);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.stress_provenance, "airy-solve");
    CaseConfig bend = registered_case("square-diagonal-stiffener-bend");
    bend.discretization.h = 0.2;
    EXPECT_EQ(run_bend(bend).max_deflection, run_bend(bend).max_deflection);
}

TEST(Pipeline, WrongLoadForCommand) {
    EXPECT_THROW(run_bend(registered_case("annular-buckle-0.2")), Error);
    EXPECT_THROW(run_buckle(registered_case("annular-bend")), Error);
    EXPECT_THROW(run_stress(registered_case("annular-bend")), Error);
    CaseConfig c = registered_case("square-hole-buckle");
    c.load.stress_source = "analytic";
    EXPECT_THROW(run_buckle(c), Error);
}

TEST(Pipeline, StressReportsAnalyticError) {
    CaseConfig c = registered_case("rect-hole-stress-uniform");
    c.discretization.h = 0.2;
    const StressReport r = run_stress(c);
    ASSERT_TRUE(r.analytic_error.has_value());
    EXPECT_LT(*r.analytic_error, 1e-4);
    EXPECT_NEAR(r.max_abs[0], 1.0, 1e-4);
}

TEST(Convergence, AnalyticAnnulusOrders) {
    CaseConfig c = registered_case("annular-bend");
    c.discretization.p = 5;
    const ConvergenceReport r = run_convergence(c, {0.2, 0.1}, Quantity::Deflection);
    EXPECT_EQ(r.reference, "analytic");
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_FALSE(r.rows[0].order.has_value());
    EXPECT_DOUBLE_EQ(*r.rows[1].order, std::log2(r.rows[0].error / r.rows[1].error));
    EXPECT_GT(r.last_order(), 4.0);
}

TEST(Convergence, FineGridReference) {
    CaseConfig c = registered_case("square-diagonal-stiffener-bend");
    const ConvergenceReport r = run_convergence(c, {0.4, 0.2}, Quantity::Deflection);
    EXPECT_EQ(r.reference.rfind("fine-grid h=0.05", 0), 0u) << r.reference;
    EXPECT_GT(r.rows[0].error, r.rows[1].error);
}

TEST(Convergence, RejectsBadLists) {
    const CaseConfig c = registered_case("annular-bend");
    EXPECT_THROW(run_convergence(c, {0.1}, Quantity::Deflection), Error);
    EXPECT_THROW(run_convergence(c, {0.1, 0.2}, Quantity::Deflection), Error);
}

TEST(Field, ZeroSolutionGivesZeroColumn) {
    const DomainSpec d = registered_case("annular-bend").domain();
    std::stringstream s;
    emit_field(s, d, 0.25, "w", [](const Vec2&) { return 0.0; });
    const auto rows = read_field(s);
    ASSERT_FALSE(rows.empty());
    for (const auto& r : rows) {
        EXPECT_EQ(r.value, 0.0);
        EXPECT_TRUE(d.contains(Vec2(r.x, r.y)));
    }
}

TEST(Field, RoundTripIsLossless) {
    const DomainSpec d = registered_case("convex-polygon-bend").domain();
    auto f = [](const Vec2& x) { return std::sin(x.x()) * std::exp(x.y() / 7.0) / 3.0; };
    std::stringstream s;
    emit_field(s, d, 0.7, "w", f);
    const std::string first = s.str();
    const auto rows = read_field(s);
    for (const auto& r : rows) EXPECT_EQ(r.value, f(Vec2(r.x, r.y)));
    std::stringstream again;
    emit_field(again, d, 0.7, "w", f);
    EXPECT_EQ(again.str(), first);
}

TEST(Field, RowOrderIsRowMajor) {
    const DomainSpec d = registered_case("rect-hole-stress-uniform").domain();
    const auto pts = field_points(d, 0.3);
    for (std::size_t i = 1; i < pts.size(); ++i)
        EXPECT_TRUE(pts[i].y() > pts[i - 1].y() || (pts[i].y() == pts[i - 1].y() && pts[i].x() > pts[i - 1].x()));
}

// Sign changes on the mid circle count the angular waves of the mode.
TEST(Field, AnnulusModeSignChanges) {
    CaseConfig c = registered_case("annular-buckle-0.68");
    c.discretization.h = 0.2;
    const BuckleReport r = run_buckle(c);
    const double rm = 0.5 * (c.holes[0].radius + c.outer.radius);
    int changes = 0;
    const int n = 720;
    double prev = r.solution.field.eval(Vec2(rm, 0.0)).v;
    for (int k = 1; k <= n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        const double v = r.solution.field.eval(Vec2(rm * std::cos(t), rm * std::sin(t))).v;
        if ((v > 0) != (prev > 0)) ++changes;
        prev = v;
    }
    EXPECT_EQ(changes % 2, 0);
    EXPECT_GE(changes, 2);  // large holes buckle with angular waves
}
