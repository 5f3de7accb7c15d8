#include "agmonlab/scenarios.hpp"

#include "agmonlab/eigensolver.hpp"
#include "agmonlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agmonlab {

namespace {

double param(const std::map<std::string, double>& p, const std::string& k, double fb) {
    auto it = p.find(k);
    return it == p.end() ? fb : it->second;
}

bool tendril_allowed(double x, double y) {
    const double dx = x + 0.6;
    if (dx * dx + y * y <= 0.4 * 0.4) return true;                  // blob
    return x >= -0.6 && x <= 0.5 && std::fabs(y) <= 0.055;          // spike
}

} // namespace

Scenario exact_1d(double x_max) {
    if (!(x_max > 1.0)) throw std::invalid_argument("exact_1d: x_max must exceed 1");
    Scenario s;
    s.name = "exact_1d";
    s.potential.kind = "exact_1d";
    s.potential.lambda = 0.0;
    s.potential.params["x_max"] = x_max;
    const int n = int(std::lround((x_max + 0.5) / 1e-3)) + 1;
    s.grid = build_grid({{-0.5, x_max}}, {n});
    s.lambda_fixed = 0.0;
    s.query_points = {{0.5, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    s.sample_window = {0.05, std::min(5.0, x_max - 1.0), 0.0, 0.0};
    return s;
}

Scenario strip(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("strip: eps must be positive");
    Scenario s;
    s.name = "strip";
    s.potential.kind = "strip";
    s.potential.params["eps"] = eps;
    s.potential.lambda = 0.0;
    s.grid = build_grid({{-1.5, 14.5}, {-3.25, 3.25}}, {513, 129});
    s.lambda_fixed = 0.0;
    s.query_points = {{2, 0}, {4, 0}, {6, 0}, {8, 0}, {10, 0}};
    s.sample_window = {1.6, 11.0, -1.5, 1.5};
    s.open_boundary = true;
    return s;
}

Scenario four_squares(double m) {
    if (!(m > 10.0)) throw std::invalid_argument("four_squares: m must exceed 10");
    Scenario s;
    s.name = "four_squares";
    s.potential.kind = "four_squares";
    s.potential.params["m"] = m;
    s.grid = build_grid({{-0.25, 2.25}, {-0.25, 2.25}}, {257, 257});
    s.eigensolve = true;
    s.query_points = {{0.5, 0.5}};
    s.sample_window = {0.1, 1.9, 0.1, 1.9};
    return s;
}

Scenario champagne(int bubble_count, double sum_radius) {
    if (bubble_count < 1) throw std::invalid_argument("champagne: need at least one bubble");
    if (!(sum_radius > 0.0) || sum_radius / bubble_count > 0.05)
        throw std::invalid_argument("champagne: bubble radii out of range");
    Scenario s;
    s.name = "champagne";
    s.potential.kind = "champagne";
    s.potential.params["bubbles"] = bubble_count;
    s.potential.params["sum_radius"] = sum_radius;
    s.potential.params["c0"] = 2.0;
    s.potential.params["core_radius"] = 0.25;
    s.grid = build_grid({{-1.15, 1.15}, {-1.15, 1.15}}, {257, 257});
    s.lambda_fixed = 0.0;
    s.query_points = {{-0.62, 0.0}};
    s.sample_window = {-0.9, 0.9, -0.9, 0.9};
    return s;
}

Scenario radial_shell(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("radial_shell: c must be positive");
    Scenario s;
    s.name = "radial_shell";
    s.potential.kind = "radial_shell";
    s.potential.params["c"] = c;
    s.grid = build_grid({{-1.25, 1.25}, {-1.25, 1.25}}, {201, 201});
    s.lambda_fixed = 0.0;
    s.query_points = {{0.0, 0.0}, {0.35, 0.2}, {-0.4, 0.15}};
    s.sample_window = {-0.6, 0.6, -0.6, 0.6};
    return s;
}

Scenario tendril(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("tendril: c must be positive");
    Scenario s;
    s.name = "tendril";
    s.potential.kind = "tendril";
    s.potential.params["c"] = c;
    s.grid = build_grid({{-3.3, 2.8}, {-2.7, 2.7}}, {265, 233});
    s.lambda_fixed = 0.0;
    s.query_points = {{0.8, 0.0}, {1.0, 0.3}};
    s.sample_window = {-1.6, 1.6, -1.2, 1.2};
    return s;
}

Scenario scenario_by_name(const std::string& name,
                          const std::map<std::string, double>& params) {
    if (name == "exact_1d") return exact_1d(param(params, "x_max", 20.0));
    if (name == "strip") return strip(param(params, "eps", 0.01));
    if (name == "four_squares") return four_squares(param(params, "m", 1e4));
    if (name == "champagne")
        return champagne(int(param(params, "bubbles", 16)), param(params, "sum_radius", 0.5));
    if (name == "radial_shell") return radial_shell(param(params, "c", 2.0));
    if (name == "tendril") return tendril(param(params, "c", 35.0));
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

RegionMask scenario_mask(const Scenario& scen, const ScalarField& V, double lambda) {
    if (scen.name == "strip" || scen.name == "four_squares")
        return region_mask(V, lambda, scen.delta);

    // declared allowed sets; the potential keeps its forbidden value there
    const Grid& g = V.grid;
    RegionMask m;
    m.grid = g;
    m.delta = scen.delta;
    m.klass.resize(g.node_count());
    std::size_t n_allowed = 0;
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        if (g.on_boundary(idx)) {
            m.klass[idx] = NodeClass::Outer;
            continue;
        }
        const Point p = g.coord(idx);
        bool allowed = false;
        if (scen.name == "exact_1d") {
            allowed = p.x <= 1e-9;
        } else if (scen.name == "radial_shell") {
            allowed = std::hypot(p.x, p.y) >= 1.0;
        } else if (scen.name == "champagne") {
            auto it = scen.potential.params.find("core_radius");
            const double rc = it == scen.potential.params.end() ? 0.25 : it->second;
            allowed = std::hypot(p.x, p.y) <= rc;
        } else if (scen.name == "tendril") {
            allowed = tendril_allowed(p.x, p.y);
        } else {
            throw std::invalid_argument("scenario_mask: unknown scenario '" + scen.name + "'");
        }
        m.klass[idx] = allowed ? NodeClass::Allowed : NodeClass::Forbidden;
        n_allowed += allowed;
    }
    if (n_allowed == 0) throw std::runtime_error("scenario_mask: empty allowed set");
    return m;
}

ScenarioArtifacts prepare_scenario(const Scenario& scen, const PrepareOptions& opt) {
    ScenarioArtifacts art;
    art.scenario = scen;
    art.V = sample_potential(scen.potential, scen.grid);

    if (scen.eigensolve) {
        const EigenPair pair = ground_state(art.V, opt.eig_tol, opt.eig_max_iter);
        art.lambda = pair.lambda;
        art.u = pair.u;
        art.solver_residual = pair.residual;
        art.mask = scenario_mask(scen, art.V, art.lambda);
    } else {
        art.lambda = scen.lambda_fixed;
        art.mask = scenario_mask(scen, art.V, art.lambda);
        art.u = pinned_state(art.V, art.lambda, art.mask, 1.0);
    }

    art.sup_norm = art.u.max_abs();
    const Grid& g = scen.grid;
    double bsup = 0.0;
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        if (!art.mask.allowed(idx)) continue;
        const int i = g.ix(idx), j = g.iy(idx);
        bool faces_forbidden = false;
        if (i > 0 && art.mask.forbidden(g.index(i - 1, j))) faces_forbidden = true;
        if (i < g.n[0] - 1 && art.mask.forbidden(g.index(i + 1, j))) faces_forbidden = true;
        if (g.dim == 2) {
            if (j > 0 && art.mask.forbidden(g.index(i, j - 1))) faces_forbidden = true;
            if (j < g.n[1] - 1 && art.mask.forbidden(g.index(i, j + 1))) faces_forbidden = true;
        }
        if (faces_forbidden) bsup = std::max(bsup, std::fabs(art.u[idx]));
    }
    art.boundary_sup = bsup;

    art.dist = fmm_distance(art.V, art.lambda, art.mask);
    return art;
}

WalkParams scenario_walk_defaults(const ScenarioArtifacts& art) {
    WalkParams p;
    const double h = art.scenario.grid.min_h();
    p.dt = 0.25 * h * h;
    double rate = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < art.V.values.size(); ++idx)
        if (art.mask.forbidden(idx)) rate = std::min(rate, art.V[idx] - art.lambda);
    rate = std::max(rate, 1e-12);
    p.t_max = 14.0 / rate;
    return p;
}

double truncation_certificate(const ScenarioArtifacts& art) {
    const Grid& g = art.scenario.grid;
    double worst = 0.0;
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        if (!art.mask.forbidden(idx)) continue;
        const int i = g.ix(idx), j = g.iy(idx);
        bool near_shell = false;
        if (i > 0 && art.mask.outer(g.index(i - 1, j))) near_shell = true;
        if (i < g.n[0] - 1 && art.mask.outer(g.index(i + 1, j))) near_shell = true;
        if (g.dim == 2) {
            if (j > 0 && art.mask.outer(g.index(i, j - 1))) near_shell = true;
            if (j < g.n[1] - 1 && art.mask.outer(g.index(i, j + 1))) near_shell = true;
        }
        if (near_shell) worst = std::max(worst, std::fabs(art.u[idx]));
    }
    return worst / std::max(art.sup_norm, 1e-300);
}

std::vector<Point> sample_forbidden_points(const ScenarioArtifacts& art, int count,
                                           std::uint64_t seed) {
    const Grid& g = art.scenario.grid;
    const auto& w = art.scenario.sample_window;
    PhiloxStream rng(seed, 0x5eedeull);
    std::vector<Point> out;
    int guard = 0;
    while (int(out.size()) < count && ++guard < 100000) {
        Point p;
        p.x = w.xlo + (w.xhi - w.xlo) * rng.uniform();
        p.y = g.dim == 2 ? w.ylo + (w.yhi - w.ylo) * rng.uniform() : 0.0;
        if (!g.contains(p)) continue;
        if (!art.mask.forbidden(g.nearest(p))) continue;
        out.push_back(p);
    }
    if (int(out.size()) < count)
        throw std::runtime_error("sample_forbidden_points: window too small");
    return out;
}

} // namespace agmonlab
