#include "webplate/harness.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace webplate;

namespace {

/// Path to a JSON config, or the id of a registered case.
CaseConfig load_config(const std::string& arg) {
    if (!std::filesystem::exists(arg)) {
        for (const auto& c : registered_cases())
            if (c.id == arg) return c;
        throw Error("config '" + arg + "' is neither a file nor a registered case");
    }
    std::ifstream f(arg);
    Json j;
    try {
        j = Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw Error("cannot parse '" + arg + "': " + e.what());
    }
    return parse_config(j);
}

void finish(const CaseConfig& c, const std::string& summary) {
    const std::string text = summary + "config = " + to_json(c).dump() + "\n";
    std::cout << text;
    if (!c.output.summary.empty()) write_text(c.output.summary, text);
}

double spacing(const CaseConfig& c) { return c.output.field_spacing > 0.0 ? c.output.field_spacing : c.discretization.h; }

void bend(const CaseConfig& c) {
    const BendReport r = run_bend(c);
    std::ostringstream s;
    s << "case = " << c.id << "\nunknowns = " << r.unknowns << "\nmax_deflection = " << fmt17(r.max_deflection)
      << "\nargmax = " << fmt17(r.argmax.x()) << " " << fmt17(r.argmax.y()) << "\nresidual = " << fmt17(r.solution.residual)
      << "\n";
    if (!c.output.field.empty()) {
        std::ofstream f(c.output.field);
        emit_field(f, c.domain(), spacing(c), "w", [&](const Vec2& x) { return r.solution.field.eval(x).v; });
    }
    finish(c, s.str());
}

void buckle(const CaseConfig& c) {
    const BuckleReport r = run_buckle(c);
    std::ostringstream s;
    s << "case = " << c.id << "\nunknowns = " << r.unknowns << "\nstress = " << r.stress_provenance
      << "\nlambda = " << fmt17(r.lambda) << "\nlambda_over_D = " << fmt17(r.lambda / c.material.D) << "\n";
    if (r.K) s << "K = " << fmt17(*r.K) << "\n";
    for (Eigen::Index k = 0; k < r.solution.higher.size(); ++k) s << "lambda_" << k + 2 << " = " << fmt17(r.solution.higher[k]) << "\n";
    s << "residual = " << fmt17(r.solution.residual) << "\n";
    if (!c.output.field.empty()) {
        std::ofstream f(c.output.field);
        emit_field(f, c.domain(), spacing(c), "mode", [&](const Vec2& x) { return r.solution.field.eval(x).v; });
    }
    finish(c, s.str());
}

void stress(const CaseConfig& c) {
    const StressReport r = run_stress(c);
    const AiryDiagnostics& d = r.airy->diagnostics();
    std::ostringstream s;
    s << "case = " << c.id << "\nunknowns = " << r.unknowns << "\nmax_abs_sxx = " << fmt17(r.max_abs[0])
      << "\nmax_abs_syy = " << fmt17(r.max_abs[1]) << "\nmax_abs_sxy = " << fmt17(r.max_abs[2]) << "\n";
    if (r.analytic_error) s << "analytic_error = " << fmt17(*r.analytic_error) << "\n";
    s << "weak_residual = " << fmt17(d.weak_residual) << "\nlift_residual = " << fmt17(d.lift_residual) << "\n";
    if (!c.output.field.empty()) {
        std::ofstream f(c.output.field);
        emit_stress_field(f, *r.airy, spacing(c));
    }
    finish(c, s.str());
}

void converge(const CaseConfig& c, const std::vector<double>& hs, const std::string& quantity, const std::string& out) {
    Quantity q;
    if (quantity == "auto") q = c.load.type == "lateral" ? Quantity::Deflection : Quantity::Stress;
    else if (quantity == "deflection") q = Quantity::Deflection;
    else if (quantity == "stress") q = Quantity::Stress;
    else throw Error("unknown quantity '" + quantity + "'");
    const ConvergenceReport r = run_convergence(c, hs, q);
    const std::string csv = convergence_csv(r, c);
    std::cout << csv;
    if (!out.empty()) write_text(out, csv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bending, buckling and pre-buckling stress of stiffened plates with WEB-splines"};
    app.require_subcommand(1);
    std::string config;
    std::vector<double> hs;
    std::string quantity = "auto", out;

    auto* b = app.add_subcommand("bend", "lateral load: deflection");
    b->add_option("config", config, "JSON config file or registered case id")->required();
    auto* k = app.add_subcommand("buckle", "in-plane load: critical load factor");
    k->add_option("config", config, "JSON config file or registered case id")->required();
    auto* s = app.add_subcommand("stress", "in-plane load: stress function solve");
    s->add_option("config", config, "JSON config file or registered case id")->required();
    auto* c = app.add_subcommand("converge", "error against a reference over several cell sizes");
    c->set_help_flag("--help", "print this help message and exit");
    c->add_option("config", config, "JSON config file or registered case id")->required();
    c->add_option("--h", hs, "cell sizes, strictly decreasing")->required()->delimiter(',');
    c->add_option("--quantity", quantity, "deflection | stress | auto");
    c->add_option("--out", out, "CSV report path");
    auto* l = app.add_subcommand("list-cases", "registered benchmark cases");

    CLI11_PARSE(app, argc, argv);
    try {
        if (l->parsed()) {
            for (const auto& cc : registered_cases()) std::cout << cc.id << "\t" << cc.description << "\n";
            return 0;
        }
        const CaseConfig cfg = load_config(config);
        if (b->parsed()) bend(cfg);
        else if (k->parsed()) buckle(cfg);
        else if (s->parsed()) stress(cfg);
        else converge(cfg, hs, quantity, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
