// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// pass. Heavy artifacts (eigensolves, distance fields) are shared across
// criteria. `--criterion N` runs a single criterion.

#include "agmonlab/bounds.hpp"
#include "agmonlab/io.hpp"
#include "agmonlab/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace agmonlab;

namespace {

constexpr std::uint64_t kSeed = 20240817;

struct Ctx {
    std::map<std::string, ScenarioArtifacts> cache;

    ScenarioArtifacts& get(const std::string& key, const std::function<Scenario()>& make) {
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, prepare_scenario(make())).first;
        return it->second;
    }
    ScenarioArtifacts& line() {
        return get("exact_1d", [] { return exact_1d(); });
    }
    ScenarioArtifacts& channel() {
        return get("strip", [] { return strip(0.01); });
    }
    ScenarioArtifacts& squares(double m) {
        char key[32];
        std::snprintf(key, sizeof key, "four_squares_%g", m);
        return get(key, [m] { return four_squares(m); });
    }
    ScenarioArtifacts& shell() {
        return get("radial_shell", [] { return radial_shell(2.0); });
    }
    ScenarioArtifacts& fizz(int bubbles) {
        char key[32];
        std::snprintf(key, sizeof key, "champagne_%d", bubbles);
        return get(key, [bubbles] { return champagne(bubbles, 0.5); });
    }
    ScenarioArtifacts& spike() {
        return get("tendril", [] { return tendril(); });
    }
};

struct Outcome {
    bool ok = true;
    std::ostringstream detail;
};

#define EXPECT(out, cond, ...)                                   \
    do {                                                         \
        if (!(cond)) {                                           \
            (out).ok = false;                                    \
            char _buf[512];                                      \
            std::snprintf(_buf, sizeof _buf, __VA_ARGS__);       \
            (out).detail << " [" << _buf << "]";                 \
        }                                                        \
    } while (0)

// ---------------------------------------------------------------- 1
Outcome criterion_1(Ctx& ctx) {
    Outcome out;
    const ScenarioArtifacts& art = ctx.line();
    const Grid& g = art.scenario.grid;
    const double h = g.h[0];
    double worst_rho = 0.0, worst_u = 0.0, worst_bound = 0.0;
    for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.x(i);
        if (x < 0.0 || x > 5.0) continue;
        const std::size_t idx = g.index(i);
        worst_rho = std::max(worst_rho, std::fabs(art.dist.rho[idx] - x));
        worst_u = std::max(worst_u, std::fabs(art.u[idx] - std::exp(-x)));
        const double bound = art.boundary_sup * std::exp(-art.dist.rho[idx]);
        worst_bound = std::max(worst_bound, std::fabs(bound - art.u[idx]));
    }
    EXPECT(out, worst_rho <= 2.0 * h, "max|rho-x|=%.3g > 2h=%.3g", worst_rho, 2.0 * h);
    EXPECT(out, worst_u <= 1e-4, "max|u-e^-x|=%.3g > 1e-4", worst_u);
    EXPECT(out, worst_bound <= 1e-4, "max|bound-u|=%.3g > 1e-4", worst_bound);
    out.detail << " max|rho-x|=" << worst_rho << " max|u-e^-x|=" << worst_u
               << " max|bound-u|=" << worst_bound;
    return out;
}

// ---------------------------------------------------------------- 2
Outcome criterion_2(Ctx& ctx) {
    Outcome out;
    const ScenarioArtifacts& art = ctx.line();
    const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());
    WalkParams wp = scenario_walk_defaults(art);
    wp.dt = 1e-4;
    wp.tau_cutoff = 60.0;
    for (double x : {0.5, 1.0, 2.0}) {
        const MeasureEstimate est =
            expected_discount(art.V, art.lambda, whole, {x, 0.0}, 200000, wp, kSeed);
        const double target = std::exp(-x);
        const double err = std::fabs(est.value - target);
        EXPECT(out, est.stderr_ <= 0.005, "stderr %.3g > 0.005 at x=%.1f", est.stderr_, x);
        EXPECT(out, err <= 3.0 * est.stderr_, "x=%.1f |%.5f-%.5f|=%.2e > 3se=%.2e", x,
               est.value, target, err, 3.0 * est.stderr_);
        out.detail << " x=" << x << ": err=" << err << " (3se=" << 3.0 * est.stderr_
                   << ")";
    }
    return out;
}

// ---------------------------------------------------------------- 3
Outcome criterion_3(Ctx&) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    for (const CheckResult& r : closed_form_selftest()) {
        EXPECT(out, r.ok, "%s: err=%.3g > tol=%.1g", r.name.c_str(), r.err, r.tol);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT(out, secs < 5.0, "suite took %.1fs >= 5s", secs);
    out.detail << " all oracle comparisons within tolerance in " << secs << "s";
    return out;
}

// ---------------------------------------------------------------- 4
Outcome criterion_4(Ctx& ctx) {
    Outcome out;
    const ScenarioArtifacts& art = ctx.squares(1e4);
    const double alpha = 4.0;
    const BubbleSet dom = bubble(art.dist, alpha);
    const ScalarField oracle = harmonic_measure_pde(dom, 1e-10);
    WalkParams wp = scenario_walk_defaults(art);

    // 20 deterministic poles inside the bubble
    std::vector<Point> poles;
    {
        PhiloxStream rng(kSeed, 404);
        const Grid& g = art.scenario.grid;
        while (poles.size() < 20) {
            Point p{0.05 + 1.9 * rng.uniform(), 0.05 + 1.9 * rng.uniform()};
            const std::size_t idx = g.nearest(p);
            if (dom.klass[idx] != BubbleSet::Class::Inside) continue;
            // stay a couple of cells away from the absorbing sets
            if (art.dist.rho[idx] > alpha - 0.5 || art.dist.rho[idx] < 0.05) continue;
            poles.push_back(p);
        }
    }
    double worst = 0.0;
    for (const Point& p : poles) {
        const MeasureEstimate mc =
            harmonic_measure_mc(art.V, art.lambda, dom, p, 100000, wp, kSeed);
        const double ref = oracle[art.scenario.grid.nearest(p)];
        const double tol = 3.0 * mc.stderr_ + 2.0 * art.scenario.grid.min_h();
        const double err = std::fabs(mc.value - ref);
        worst = std::max(worst, err - tol);
        EXPECT(out, err <= tol, "pole (%.2f,%.2f): |%.4f-%.4f| > %.4f", p.x, p.y,
               mc.value, ref, tol);
    }
    out.detail << " 20 poles, worst err-minus-tol=" << worst;

    // the two walk clocks agree on both scenarios
    {
        const ScenarioArtifacts& ch = ctx.channel();
        const BubbleSet cdom = bubble(ch.dist, 3.0);
        const TimeChangeReport tc = time_change_equivalence(
            ch.V, ch.lambda, cdom, {3.0, 0.0}, 30000, scenario_walk_defaults(ch), kSeed);
        EXPECT(out, tc.agree, "channel clocks disagree: z=%.2f", tc.z);
        out.detail << " channel z=" << tc.z;
    }
    {
        const TimeChangeReport tc = time_change_equivalence(art.V, art.lambda, dom,
                                                            {0.5, 0.5}, 30000, wp, kSeed);
        EXPECT(out, tc.agree, "square clocks disagree: z=%.2f", tc.z);
        out.detail << " squares z=" << tc.z;
    }
    return out;
}

// ---------------------------------------------------------------- 5
Outcome criterion_5(Ctx& ctx) {
    Outcome out;
    const ScenarioArtifacts& art = ctx.channel();
    PdeMeasureBackend omega(art.dist);
    BoundConfig cfg;
    cfg.alpha_grid = log_spaced(0.3, 12.0, 40);

    std::vector<double> lx, la;
    double bound_at_10 = 0.0;
    for (double x : {2.0, 4.0, 6.0, 8.0, 10.0}) {
        const BubbleBound b = bubble_bound({x, 0.0}, art.dist, omega, cfg, 1.0);
        lx.push_back(std::log(x));
        la.push_back(std::log(b.alpha_star));
        if (x == 10.0) bound_at_10 = b.value;
        out.detail << " a*(" << x << ")=" << b.alpha_star;
    }
    const double classical = std::exp(-std::sqrt(2.0 * 0.01) * 10.0);
    EXPECT(out, bound_at_10 * 10.0 <= classical,
           "bound(10)=%.3g not 10x under the classical %.3g", bound_at_10, classical);
    out.detail << " bound(10)=" << bound_at_10 << " classical=" << classical;

    // least-squares slope of log alpha* against log x
    const int n = int(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        sx += lx[k];
        sy += la[k];
        sxx += lx[k] * lx[k];
        sxy += lx[k] * la[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT(out, slope >= 0.55 && slope <= 0.80, "slope %.3f outside [0.55, 0.80]", slope);
    out.detail << " slope=" << slope;
    return out;
}

// ---------------------------------------------------------------- 6
Outcome criterion_6(Ctx& ctx) {
    Outcome out;
    std::vector<double> sup_mild, law;
    for (double m : {1e2, 1e3, 1e4}) {
        const ScenarioArtifacts& art = ctx.squares(m);
        EXPECT(out, art.lambda <= M_PI * M_PI + 0.1, "m=%g: lambda=%.4f > pi^2+0.1", m,
               art.lambda);
        const Grid& g = art.scenario.grid;
        double sup = 0.0;
        for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
            const Point p = g.coord(idx);
            if (p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)
                sup = std::max(sup, std::fabs(art.u[idx]));
        }
        sup_mild.push_back(sup);
        law.push_back(sup * std::sqrt(m) / std::log(m));
        out.detail << " m=" << m << ": lambda=" << art.lambda << " sup=" << sup;
    }
    EXPECT(out, sup_mild[0] > sup_mild[1] && sup_mild[1] > sup_mild[2],
           "sup over the mild square is not decreasing (%.3g, %.3g, %.3g)", sup_mild[0],
           sup_mild[1], sup_mild[2]);
    const double ratio = *std::max_element(law.begin(), law.end()) /
                         *std::min_element(law.begin(), law.end());
    EXPECT(out, ratio < 10.0, "scaling law spread %.2f >= 10", ratio);
    out.detail << " law-spread=" << ratio;
    return out;
}

// ---------------------------------------------------------------- 7
struct SweepSetup {
    long n_disc;
    double dt_scale;   // dt = dt_scale * h^2
    std::vector<double> alphas;
};

Outcome sweep_scenario(const ScenarioArtifacts& art, const SweepSetup& s, Outcome out,
                       std::vector<Point>* pts_out = nullptr,
                       const ScalarField** omega_out = nullptr) {
    static std::map<const ScenarioArtifacts*, ScalarField> omega_cache;
    const DistanceLaplacian dl = distance_laplacian(art.dist);
    PdeMeasureBackend omega(art.dist);
    auto it = omega_cache.find(&art);
    if (it == omega_cache.end()) {
        const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());
        it = omega_cache.emplace(&art, harmonic_measure_pde(whole, 1e-10)).first;
    }
    const ScalarField& omega_full = it->second;
    if (omega_out) *omega_out = &omega_full;

    BoundConfig cfg;
    cfg.alpha_grid = s.alphas;
    WalkParams wp = scenario_walk_defaults(art);
    wp.dt = s.dt_scale * art.scenario.grid.min_h() * art.scenario.grid.min_h();

    const std::vector<Point> pts = sample_forbidden_points(art, 50, kSeed);
    if (pts_out) *pts_out = pts;
    BoundReportInputs in{art, dl, omega, omega_full, cfg, s.n_disc, wp, kSeed};
    try {
        bound_report(in, pts);
        out.detail << " " << art.scenario.name << ": 50 points sound";
    } catch (const std::exception& e) {
        EXPECT(out, false, "%s", e.what());
    }
    return out;
}

Outcome criterion_7(Ctx& ctx) {
    Outcome out;
    out = sweep_scenario(ctx.line(), {1500, 10.0, log_spaced(0.3, 10.0, 24)}, std::move(out));
    out = sweep_scenario(ctx.channel(), {2000, 0.5, log_spaced(0.3, 12.0, 24)}, std::move(out));
    out = sweep_scenario(ctx.squares(1e4), {2000, 0.25, log_spaced(0.5, 8.0, 24)}, std::move(out));
    out = sweep_scenario(ctx.fizz(16), {2000, 0.5, log_spaced(0.5, 10.0, 24)}, std::move(out));
    out = sweep_scenario(ctx.shell(), {2000, 0.5, log_spaced(0.5, 6.0, 24)}, std::move(out));
    out = sweep_scenario(ctx.spike(), {2000, 1.0, log_spaced(1.0, 14.0, 24)}, std::move(out));
    return out;
}

// ---------------------------------------------------------------- 8
Outcome criterion_8(Ctx& ctx) {
    Outcome out;
    BoundConfig cfg;

    struct Case {
        const ScenarioArtifacts* art;
        bool tube;
    };
    const std::vector<Case> cases{{&ctx.line(), true},   {&ctx.channel(), false},
                                  {&ctx.squares(1e4), false}, {&ctx.fizz(16), false},
                                  {&ctx.shell(), true},  {&ctx.spike(), false}};
    for (const Case& c : cases) {
        const ScenarioArtifacts& art = *c.art;
        const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());
        const ScalarField omega_full = harmonic_measure_pde(whole, 1e-10);
        const std::vector<Point> pts = sample_forbidden_points(art, 50, kSeed);
        const TubeReport rep =
            tube_check(pts, art.u, art.sup_norm, omega_full, art.dist, cfg);
        EXPECT(out, rep.trivial_ok, "%s: trivial direction fails",
               art.scenario.name.c_str());
        if (c.tube) {
            EXPECT(out, rep.consistent, "%s: sharp point below the tube floor",
                   art.scenario.name.c_str());
            out.detail << " " << art.scenario.name << ": tube-consistent (C="
                       << rep.best_fit_c << ")";
        } else {
            out.detail << " " << art.scenario.name << ": trivial ok";
        }
    }
    return out;
}

// ---------------------------------------------------------------- 9
Outcome criterion_9(Ctx& ctx) {
    Outcome out;
    const std::vector<const ScenarioArtifacts*> arts{&ctx.line(),      &ctx.channel(),
                                                     &ctx.squares(1e4), &ctx.fizz(16),
                                                     &ctx.shell(),     &ctx.spike()};
    for (const ScenarioArtifacts* art : arts) {
        EXPECT(out, art->dist.max_residual <= 1e-8, "%s: upwind residual %.2e",
               art->scenario.name.c_str(), art->dist.max_residual);
        const DistanceField dij =
            dijkstra_distance(art->V, art->lambda, art->mask);
        const OracleAgreement a = compare_distance_fields(art->dist, dij);
        EXPECT(out, a.bulk_worst <= 0.08, "%s: bulk disagreement %.3f > 0.08",
               art->scenario.name.c_str(), a.bulk_worst);
        EXPECT(out, a.near_worst_scaled <= 1.0,
               "%s: near-field disagreement beyond one edge coefficient (%.2f)",
               art->scenario.name.c_str(), a.near_worst_scaled);
        out.detail << " " << art->scenario.name << ": bulk=" << a.bulk_worst
                   << " near=" << a.near_worst_scaled
                   << " res=" << art->dist.max_residual;
    }
    return out;
}

// ---------------------------------------------------------------- 10
Outcome criterion_10(Ctx& ctx) {
    Outcome out;
    const Point pole{-0.62, 0.0};
    const double alpha = 6.0;
    double omega_val[2], rho_val[2];
    int k = 0;
    for (int count : {16, 64}) {
        const ScenarioArtifacts& art = ctx.fizz(count);
        const BubbleSet dom = bubble(art.dist, alpha);
        const ScalarField h = harmonic_measure_pde(dom, 1e-10);
        omega_val[k] = h[art.scenario.grid.nearest(pole)];
        rho_val[k] = art.dist.rho[art.scenario.grid.nearest(pole)];
        ++k;
    }
    const double drop = 1.0 - omega_val[1] / omega_val[0];
    const double rho_change = std::fabs(rho_val[1] - rho_val[0]) / rho_val[0];
    EXPECT(out, drop >= 0.25, "measure dropped only %.1f%%", 100.0 * drop);
    EXPECT(out, rho_change < 0.05, "distance moved %.1f%%", 100.0 * rho_change);
    out.detail << " omega " << omega_val[0] << " -> " << omega_val[1] << " (drop "
               << 100.0 * drop << "%), rho change " << 100.0 * rho_change << "%";
    return out;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int a = 1; a < argc; ++a)
        if (std::strcmp(argv[a], "--criterion") == 0 && a + 1 < argc)
            only = std::atoi(argv[a + 1]);

    struct Entry {
        int id;
        const char* name;
        Outcome (*run)(Ctx&);
    };
    const Entry entries[] = {
        {1, "half-line sharpness (rho, state, pointwise bound)", criterion_1},
        {2, "discount identity E[e^-tau] = e^-x on the half line", criterion_2},
        {3, "closed-form oracle suite", criterion_3},
        {4, "measure cross-validation and clock invariance", criterion_4},
        {5, "channel decay: bound gain and level scaling", criterion_5},
        {6, "four-square insulator scaling", criterion_6},
        {7, "soundness sweep over all scenarios", criterion_7},
        {8, "trivial and tube diagnostics", criterion_8},
        {9, "eikonal oracle agreement and residuals", criterion_9},
        {10, "champagne: measure drops, distance stays", criterion_10},
    };

    Ctx ctx;
    bool all_ok = true;
    for (const Entry& e : entries) {
        if (only != 0 && e.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.run(ctx);
        } catch (const std::exception& ex) {
            out.ok = false;
            out.detail << " [exception: " << ex.what() << "]";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.1fs)%s\n", out.ok ? "PASS" : "FAIL", e.id,
                    e.name, secs, out.detail.str().c_str());
        std::fflush(stdout);
        all_ok = all_ok && out.ok;
    }
    return all_ok ? 0 : 1;
}
