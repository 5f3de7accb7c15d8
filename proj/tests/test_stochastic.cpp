#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agmonlab/scenarios.hpp"
#include "agmonlab/stochastic.hpp"

#include <algorithm>
#include <cmath>

using namespace agmonlab;

namespace {

template <class Pred>
RegionMask mask_from(const Grid& g, Pred&& allowed) {
    RegionMask m;
    m.grid = g;
    m.klass.resize(g.node_count());
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        if (g.on_boundary(idx))
            m.klass[idx] = NodeClass::Outer;
        else
            m.klass[idx] = allowed(g.coord(idx)) ? NodeClass::Allowed : NodeClass::Forbidden;
    }
    return m;
}

BubbleSet whole_forbidden(const ScalarField& V, double lambda, const RegionMask& m) {
    return bubble(fmm_distance(V, lambda, m), std::numeric_limits<double>::infinity());
}

} // namespace

TEST_CASE("counter-based streams and the normal generator") {
    PhiloxStream a(42, 0), b(42, 0), c(42, 1);
    for (int k = 0; k < 64; ++k) {
        const double va = a.uniform();
        CHECK(va == b.uniform());       // same stream reproduces
        CHECK(va > 0.0);
        CHECK(va <= 1.0);
    }
    bool differs = false;
    for (int k = 0; k < 64; ++k) differs = differs || a.next_u32() != c.next_u32();
    CHECK(differs);

    PhiloxStream z(7, 0);
    const long n = 2000000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
    long tails = 0;
    for (long k = 0; k < n; ++k) {
        const double x = z.normal();
        sum += x;
        sum2 += x * x;
        sum3 += x * x * x;
        if (std::fabs(x) > 3.0) ++tails;
    }
    const double mean = sum / n, var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.004);
    CHECK(std::fabs(var - 1.0) < 0.01);
    CHECK(std::fabs(sum3 / n) < 0.02);
    const double p3 = double(tails) / n;   // true value 0.0026998
    CHECK(p3 > 0.0022);
    CHECK(p3 < 0.0032);
}

TEST_CASE("interval exit probabilities match the ruin formula") {
    const Grid g = build_grid({{0.0, 1.0}}, {201});
    ScalarField V(g, 1.0);
    const RegionMask m = mask_from(g, [](Point p) { return p.x <= 0.15 + 1e-12; });
    const BubbleSet dom = whole_forbidden(V, 0.0, m);

    WalkParams wp;
    wp.dt = 4e-5;
    wp.t_max = 40.0;
    const double A = 0.15, B = 1.0;
    for (double x : {0.3, 0.5, 0.75}) {
        const MeasureEstimate est =
            harmonic_measure_mc(V, 0.0, dom, {x, 0.0}, 20000, wp, 99);
        const double exact = (B - x) / (B - A);
        CHECK(std::fabs(est.value - exact) <= 3.0 * est.stderr_ + 2.0 * g.h[0]);
        // the class tally is exact by construction
        CHECK(est.n_hit_e + est.n_hit_alpha + est.n_hit_outer + est.n_timeout ==
              est.n_samples);
        CHECK(est.value == double(est.n_hit_e) / est.n_samples);
    }
}

TEST_CASE("rotational symmetry of the exit arc") {
    const Grid g = build_grid({{-1.0, 1.0}, {-1.0, 1.0}}, {161, 161});
    ScalarField V(g, 1.0);
    // allowed target: the quarter arc outside radius 0.8
    const RegionMask m = mask_from(g, [](Point p) {
        return std::hypot(p.x, p.y) >= 0.8 && p.x > 0.0 && p.y > 0.0;
    });
    BubbleSet dom;
    dom.grid = g;
    dom.mask = m;
    dom.alpha = 1.0;
    dom.rho = ScalarField(g, 0.0);
    dom.klass.assign(g.node_count(), BubbleSet::Class::Outside);
    for (std::size_t idx = 0; idx < g.node_count(); ++idx)
        if (m.forbidden(idx) && std::hypot(g.coord(idx).x, g.coord(idx).y) < 0.8)
            dom.klass[idx] = BubbleSet::Class::Inside;

    WalkParams wp;
    wp.dt = 0.25 * g.min_h() * g.min_h();
    wp.t_max = 50.0;
    const MeasureEstimate est = harmonic_measure_mc(V, 0.0, dom, {0.0, 0.0}, 20000, wp, 5);
    CHECK(std::fabs(est.value - 0.25) <= 3.0 * est.stderr_ + 0.01);
}

TEST_CASE("immediate exits and precondition errors") {
    const Grid g = build_grid({{0.0, 1.0}}, {101});
    ScalarField V(g, 1.0);
    const RegionMask m = mask_from(g, [](Point p) { return p.x <= 0.3; });
    const BubbleSet dom = whole_forbidden(V, 0.0, m);
    WalkParams wp;
    PhiloxStream rng(1, 0);
    const ClockedExit e = simulate_exit(V, 0.0, dom, {0.2, 0.0}, wp, rng);
    CHECK(e.exit_class == ClockedExit::Kind::HitE);
    CHECK(e.agmon_clock == 0.0);
    CHECK_THROWS_AS(simulate_exit(V, 0.0, dom, {2.0, 0.0}, wp, rng),
                    std::invalid_argument);
}

TEST_CASE("constant gap makes the clock proportional to time") {
    const Scenario scen = exact_1d(8.0);
    const ScalarField V = sample_potential(scen.potential, scen.grid);
    const RegionMask m = scenario_mask(scen, V, 0.0);
    const BubbleSet dom = whole_forbidden(V, 0.0, m);
    WalkParams wp;
    wp.dt = 1e-3;
    wp.t_max = 30.0;
    for (int rep = 0; rep < 10; ++rep) {
        PhiloxStream rng(77, rep);
        const ClockedExit e = simulate_exit(V, 0.0, dom, {1.0, 0.0}, wp, rng);
        CHECK(std::fabs(e.agmon_clock - 0.5 * e.euclid_time) <=
              1e-12 * std::max(e.euclid_time, 1.0));
    }
}

TEST_CASE("first-passage median of the line walk") {
    const Scenario scen = exact_1d(12.0);
    const ScalarField V = sample_potential(scen.potential, scen.grid);
    const RegionMask m = scenario_mask(scen, V, 0.0);
    const BubbleSet dom = whole_forbidden(V, 0.0, m);
    WalkParams wp;
    wp.dt = 1e-3;
    wp.t_max = 30.0;

    const long n = 20000;
    std::vector<double> sigma(n);
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < n; ++k) {
        PhiloxStream rng(2718, k);
        sigma[k] = simulate_exit(V, 0.0, dom, {1.0, 0.0}, wp, rng).euclid_time;
    }
    std::nth_element(sigma.begin(), sigma.begin() + n / 2, sigma.end());
    const double median = sigma[n / 2];
    // solve erfc(1/sqrt(2 t)) = 1/2 by bisection: t* = 2.1981
    double lo = 0.5, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::erfc(1.0 / std::sqrt(2.0 * mid)) < 0.5 ? lo : hi) = mid;
    }
    const double target = 0.5 * (lo + hi);
    CHECK(target == doctest::Approx(2.198).epsilon(1e-3));
    CHECK(std::fabs(median - target) <= 0.1);
}

TEST_CASE("discount identity on the half line") {
    const Scenario scen = exact_1d(12.0);
    const ScalarField V = sample_potential(scen.potential, scen.grid);
    const RegionMask m = scenario_mask(scen, V, 0.0);
    const BubbleSet dom = whole_forbidden(V, 0.0, m);

    WalkParams wp;
    wp.dt = 4e-4;
    wp.t_max = 28.0;
    wp.tau_cutoff = 60.0;
    const MeasureEstimate est =
        expected_discount(V, 0.0, dom, {1.0, 0.0}, 40000, wp, 314);
    CHECK(std::fabs(est.value - std::exp(-1.0)) <= 3.0 * est.stderr_ + 0.004);
    CHECK(est.stderr_ < 0.01);
    // bounded by the exit probability plus the dropped ceiling
    const MeasureEstimate hit = harmonic_measure_mc(V, 0.0, dom, {1.0, 0.0}, 10000, wp, 314);
    CHECK(est.value <= hit.value + 3.0 * hit.stderr_ + est.dropped_ceiling + 0.01);

    // halving dt moves the estimate by less than the combined noise
    WalkParams wp2 = wp;
    wp2.dt = 2e-4;
    const MeasureEstimate est2 =
        expected_discount(V, 0.0, dom, {1.0, 0.0}, 40000, wp2, 315);
    CHECK(std::fabs(est.value - est2.value) <=
          3.0 * std::hypot(est.stderr_, est2.stderr_) + 0.003);

    // starting on the allowed boundary discounts nothing
    const MeasureEstimate unit = expected_discount(V, 0.0, dom, {0.0, 0.0}, 200, wp, 1);
    CHECK(unit.value == doctest::Approx(1.0));
}

TEST_CASE("serial and parallel estimators agree bitwise") {
    const Grid g = build_grid({{0.0, 1.0}}, {101});
    ScalarField V(g, 1.0);
    const RegionMask m = mask_from(g, [](Point p) { return p.x <= 0.3; });
    const BubbleSet dom = whole_forbidden(V, 0.0, m);
    WalkParams wp;
    wp.dt = 1e-4;
    wp.t_max = 20.0;
    const MeasureEstimate p = harmonic_measure_mc(V, 0.0, dom, {0.6, 0.0}, 2000, wp, 21);
    const MeasureEstimate s =
        harmonic_measure_mc_serial(V, 0.0, dom, {0.6, 0.0}, 2000, wp, 21);
    CHECK(p.value == s.value);
    CHECK(p.stderr_ == s.stderr_);
    CHECK(p.n_hit_e == s.n_hit_e);

    wp.tau_cutoff = 60.0;
    const MeasureEstimate dp = expected_discount(V, 0.0, dom, {0.6, 0.0}, 2000, wp, 21);
    const MeasureEstimate ds = expected_discount_serial(V, 0.0, dom, {0.6, 0.0}, 2000, wp, 21);
    CHECK(dp.value == ds.value);
    CHECK(dp.stderr_ == ds.stderr_);

    CHECK_THROWS_AS(harmonic_measure_mc(V, 0.0, dom, {0.6, 0.0}, 50, wp, 1),
                    std::invalid_argument);
}

TEST_CASE("relaxation oracle on an interval is linear") {
    const Grid g = build_grid({{0.0, 1.0}}, {401});
    ScalarField V(g, 1.0);
    const RegionMask m = mask_from(g, [](Point p) { return p.x <= 0.2 + 1e-12; });
    const BubbleSet dom = whole_forbidden(V, 0.0, m);
    const ScalarField h = harmonic_measure_pde(dom, 1e-12);
    // absorbing at the last allowed node A and at the right box node B
    const double A = 0.2, B = 1.0;
    for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.x(i);
        if (x <= A || x >= B) continue;
        CHECK(h.at(i) == doctest::Approx((B - x) / (B - A)).epsilon(1e-7));
    }
}

TEST_CASE("red-black and lexicographic relaxation agree") {
    const ScenarioArtifacts art = prepare_scenario(radial_shell(2.0));
    const BubbleSet dom = bubble(art.dist, std::numeric_limits<double>::infinity());
    const ScalarField a = harmonic_measure_pde(dom, 1e-11);
    const ScalarField b = harmonic_measure_pde_serial(dom, 1e-11);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    CHECK(worst < 1e-6);
    // interior values are probabilities up to the relaxation overshoot
    for (double v : a.values) {
        CHECK(v >= -1e-6);
        CHECK(v <= 1.0 + 1e-6);
    }
}

TEST_CASE("time change preserves the exit law under a constant gap") {
    const Grid g = build_grid({{-1.0, 1.0}, {-1.0, 1.0}}, {101, 101});
    ScalarField V(g, 1.0);
    const RegionMask m = mask_from(g, [](Point p) { return std::hypot(p.x, p.y) >= 0.8; });
    const BubbleSet dom = whole_forbidden(V, 0.0, m);
    WalkParams wp;
    wp.dt = 0.25 * g.min_h() * g.min_h();
    wp.t_max = 50.0;
    const TimeChangeReport rep =
        time_change_equivalence(V, 0.0, dom, {0.1, 0.0}, 20000, wp, 4242);
    CHECK(rep.agree);
}
