// Command-line front end: scenario runs, distance/bound reports, and the
// closed-form self test, with machine-readable CSV/JSON outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include "agmonlab/bounds.hpp"
#include "agmonlab/io.hpp"
#include "agmonlab/selftest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace agmonlab;
using nlohmann::json;

namespace {

struct CliOptions {
    std::string scenario;
    std::string config_path;
    std::uint64_t seed = 12345;
    long n_samples = 20000;
    double dt = 0.0;
    std::string alpha_spec;
    std::string out_dir = ".";
    double alpha = 0.0;          // bubble level for `agmon` / `measure`
    bool time_change = false;
};

RunConfig resolve_config(const CliOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) {
        std::ifstream f(opt.config_path);
        if (!f) throw ConfigError("config: cannot open " + opt.config_path);
        json j;
        try {
            j = json::parse(f);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
        cfg.scenario = scenario_from_json(j);
    } else if (!opt.scenario.empty()) {
        try {
            cfg.scenario = scenario_by_name(opt.scenario, {});
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    } else {
        throw ConfigError("config: provide --scenario or --config");
    }
    cfg.seed = opt.seed;
    cfg.n_samples = opt.n_samples;
    cfg.dt = opt.dt;
    if (!opt.alpha_spec.empty()) cfg.alpha_grid = parse_alpha_grid(opt.alpha_spec);
    cfg.out_dir = opt.out_dir;
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

WalkParams walk_params(const RunConfig& cfg, const ScenarioArtifacts& art) {
    WalkParams p = scenario_walk_defaults(art);
    if (cfg.dt > 0.0) p.dt = cfg.dt;
    return p;
}

std::string path_in(const RunConfig& cfg, const char* name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_eig(const CliOptions& opt) {
    const RunConfig cfg = resolve_config(opt);
    const ScenarioArtifacts art = prepare_scenario(cfg.scenario);

    json j;
    j["scenario"] = cfg.scenario.name;
    j["lambda"] = art.lambda;
    j["mode"] = cfg.scenario.eigensolve ? "eigensolve" : "pinned";
    j["residual"] = art.solver_residual;
    j["boundary_sup"] = art.boundary_sup;
    j["sup_norm"] = art.sup_norm;
    j["seed"] = cfg.seed;
    if (!cfg.scenario.open_boundary)
        j["truncation_certificate"] = truncation_certificate(art);
    write_text(path_in(cfg, "eig.json"), j.dump(2) + "\n");

    const Grid& g = art.scenario.grid;
    std::vector<std::vector<double>> rows;
    rows.reserve(g.node_count());
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        const Point p = g.coord(idx);
        if (g.dim == 2)
            rows.push_back({p.x, p.y, art.u[idx]});
        else
            rows.push_back({p.x, art.u[idx]});
    }
    const std::vector<std::string> cols =
        g.dim == 2 ? std::vector<std::string>{"x", "y", "u"}
                   : std::vector<std::string>{"x", "u"};
    write_csv(path_in(cfg, "u.csv"), provenance_lines(cfg), cols, rows);
    return 0;
}

int cmd_agmon(const CliOptions& opt) {
    const RunConfig cfg = resolve_config(opt);
    const ScenarioArtifacts art = prepare_scenario(cfg.scenario);
    const DistanceLaplacian dl = distance_laplacian(art.dist);

    const Grid& g = art.scenario.grid;
    std::vector<std::vector<double>> rows;
    rows.reserve(g.node_count());
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        const Point p = g.coord(idx);
        std::vector<double> row;
        if (g.dim == 2) row = {p.x, p.y};
        else row = {p.x};
        row.push_back(art.dist.rho[idx]);
        row.push_back(dl.lap[idx]);
        row.push_back(double(dl.certified[idx] && dl.nonneg[idx]));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> cols = g.dim == 2
                                        ? std::vector<std::string>{"x", "y"}
                                        : std::vector<std::string>{"x"};
    cols.insert(cols.end(), {"rho", "drho", "drho_flag"});
    write_csv(path_in(cfg, "agmon.csv"), provenance_lines(cfg), cols, rows);

    if (opt.alpha > 0.0) {
        const BubbleSet b = bubble(art.dist, opt.alpha);
        std::vector<std::vector<double>> brows;
        for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
            if (b.klass[idx] == BubbleSet::Class::Outside) continue;
            const Point p = g.coord(idx);
            brows.push_back({p.x, p.y, double(static_cast<int>(b.klass[idx]))});
        }
        write_csv(path_in(cfg, "bubble.csv"), provenance_lines(cfg),
                  {"x", "y", "class"}, brows);
    }
    return 0;
}

int cmd_measure(const CliOptions& opt) {
    const RunConfig cfg = resolve_config(opt);
    const ScenarioArtifacts art = prepare_scenario(cfg.scenario);
    const WalkParams wp = walk_params(cfg, art);
    const double alpha =
        opt.alpha > 0.0 ? opt.alpha : std::numeric_limits<double>::infinity();
    const BubbleSet domain = bubble(art.dist, alpha);
    const ScalarField pde = harmonic_measure_pde(domain);

    json points = json::array();
    bool all_consistent = true;
    for (const Point& q : cfg.scenario.query_points) {
        const MeasureEstimate mc = harmonic_measure_mc(art.V, art.lambda, domain, q,
                                                       cfg.n_samples, wp, cfg.seed);
        const double oracle = pde[art.scenario.grid.nearest(q)];
        const double tol = 3.0 * mc.stderr_ + 2.0 * art.scenario.grid.min_h();
        const bool consistent = std::fabs(mc.value - oracle) <= tol;
        all_consistent = all_consistent && consistent;
        json rec;
        rec["point"] = {q.x, q.y};
        rec["mc"] = {{"value", mc.value},
                     {"stderr", mc.stderr_},
                     {"n_samples", mc.n_samples},
                     {"seed", mc.seed},
                     {"timeout_fraction", mc.timeout_fraction},
                     {"warning", mc.warning}};
        rec["pde"] = oracle;
        rec["consistent"] = consistent;
        if (opt.time_change) {
            const TimeChangeReport tc = time_change_equivalence(
                art.V, art.lambda, domain, q, cfg.n_samples, wp, cfg.seed);
            rec["time_change"] = {{"uniform", tc.uniform_clock.value},
                                  {"rescaled", tc.rescaled_clock.value},
                                  {"z", tc.z},
                                  {"agree", tc.agree}};
            all_consistent = all_consistent && tc.agree;
        }
        points.push_back(rec);
    }
    json j;
    j["scenario"] = cfg.scenario.name;
    j["alpha"] = opt.alpha > 0.0 ? json(opt.alpha) : json("all-forbidden");
    j["dt"] = wp.dt;
    j["t_max"] = wp.t_max;
    j["seed"] = cfg.seed;
    j["points"] = points;
    write_text(path_in(cfg, "measure.json"), j.dump(2) + "\n");
    return all_consistent ? 0 : 1;
}

int cmd_bounds(const CliOptions& opt) {
    const RunConfig cfg = resolve_config(opt);
    const ScenarioArtifacts art = prepare_scenario(cfg.scenario);
    const DistanceLaplacian dl = distance_laplacian(art.dist);

    BoundConfig bc;
    bc.alpha_grid = cfg.alpha_grid.empty() ? log_spaced(0.25, 12.0, 32) : cfg.alpha_grid;
    bc.delta = cfg.scenario.delta;

    PdeMeasureBackend omega(art.dist);
    const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());
    const ScalarField omega_full = harmonic_measure_pde(whole);

    BoundReportInputs in{art, dl, omega, omega_full, bc, cfg.n_samples,
                         walk_params(cfg, art), cfg.seed};
    std::vector<BoundReport> rows;
    try {
        rows = bound_report(in, cfg.scenario.query_points);
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "soundness failure: %s\n", e.what());
        return 1;
    }

    std::vector<std::vector<double>> out;
    for (const BoundReport& r : rows)
        out.push_back({r.point.x, r.point.y, r.u_abs, r.rho, r.agmon_bound,
                       double(r.drho_flag), r.thm1_value, r.alpha_star, r.omega_star,
                       r.fk_value, r.fk_stderr, r.tube_lhs, r.tube_rhs});
    write_csv(path_in(cfg, "bounds.csv"), provenance_lines(cfg),
              {"x", "y", "u_abs", "rho", "agmon_bound", "drho_flag", "thm1_value",
               "alpha_star", "omega_star", "fk_value", "fk_stderr", "tube_lhs",
               "tube_rhs"},
              out);
    return 0;
}

int cmd_closed_forms() {
    bool all_ok = true;
    for (const CheckResult& r : closed_form_selftest()) {
        std::printf("[%s] %-50s err=%.3e tol=%.1e\n", r.ok ? "PASS" : "FAIL",
                    r.name.c_str(), r.err, r.tol);
        all_ok = all_ok && r.ok;
    }
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decay-bound laboratory for localized states"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--scenario", opt.scenario,
                        "scenario name (exact_1d, strip, four_squares, champagne, "
                        "radial_shell, tendril)");
        sub->add_option("--config", opt.config_path, "scenario JSON file");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--samples", opt.n_samples, "Monte Carlo replicas");
        sub->add_option("--dt", opt.dt, "walk time step (0: h^2/4)");
        sub->add_option("--alpha-grid", opt.alpha_spec, "lo:hi:n or lo:hi:nlog");
        sub->add_option("--out", opt.out_dir, "output directory");
    };

    CLI::App* eig = app.add_subcommand("eig", "solve for the state and write u");
    add_common(eig);
    CLI::App* agmon = app.add_subcommand("agmon", "distance field and its Laplacian");
    add_common(agmon);
    agmon->add_option("--alpha", opt.alpha, "also write the level-alpha bubble");
    CLI::App* measure = app.add_subcommand("measure", "exit-probability estimates");
    add_common(measure);
    measure->add_option("--alpha", opt.alpha, "bubble level (default: whole forbidden set)");
    measure->add_flag("--time-change", opt.time_change, "also compare the two walk clocks");
    CLI::App* bounds = app.add_subcommand("bounds", "per-point bound report");
    add_common(bounds);
    CLI::App* cf = app.add_subcommand("closed-forms", "closed-form self test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (eig->parsed()) return cmd_eig(opt);
        if (agmon->parsed()) return cmd_agmon(opt);
        if (measure->parsed()) return cmd_measure(opt);
        if (bounds->parsed()) return cmd_bounds(opt);
        if (cf->parsed()) return cmd_closed_forms();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
