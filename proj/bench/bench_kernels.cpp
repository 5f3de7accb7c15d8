// Serial reference vs OpenMP kernels: stencil application, red-black
// relaxation, and batched exit walks. Prints timings, speedups, and checks
// that the parallel results match the reference.

#include "agmonlab/eigensolver.hpp"
#include "agmonlab/scenarios.hpp"
#include "agmonlab/stochastic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace agmonlab;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds(clock_type::time_point a, clock_type::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

template <class F>
double timed(F&& f, int reps) {
    const auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) f();
    return seconds(t0, clock_type::now()) / reps;
}

void row(const char* name, double serial, double parallel, bool match) {
    std::printf("%-28s serial %8.4f s   parallel %8.4f s   speedup %5.2fx   %s\n", name,
                serial, parallel, serial / parallel, match ? "results match" : "MISMATCH");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif

    // stencil application on the four-square grid
    {
        const Scenario scen = four_squares(1e3);
        const ScalarField V = sample_potential(scen.potential, scen.grid);
        ScalarField v(scen.grid, 0.0);
        for (std::size_t i = 0; i < v.values.size(); ++i)
            v[i] = std::sin(0.01 * double(i));
        ScalarField out_s, out_p;
        const double ts = timed([&] { out_s = apply_hamiltonian_serial(V, v); }, 50);
        const double tp = timed([&] { out_p = apply_hamiltonian(V, v); }, 50);
        bool match = true;
        for (std::size_t i = 0; i < out_s.values.size(); ++i)
            match = match && out_s[i] == out_p[i];
        row("hamiltonian apply (257^2)", ts, tp, match);
    }

    // relaxation solve for the exit probability on the shell
    {
        const ScenarioArtifacts art = prepare_scenario(radial_shell(2.0));
        const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());
        ScalarField hs, hp;
        const double ts = timed([&] { hs = harmonic_measure_pde_serial(whole, 1e-10); }, 3);
        const double tp = timed([&] { hp = harmonic_measure_pde(whole, 1e-10); }, 3);
        // different sweep orders converge to the same solution within tolerance
        double worst = 0.0;
        for (std::size_t i = 0; i < hs.values.size(); ++i)
            worst = std::max(worst, std::fabs(hs[i] - hp[i]));
        row("exit-probability SOR (201^2)", ts, tp, worst < 1e-6);
    }

    // batched walks: replica-indexed streams make the two runs bit-identical
    {
        const ScenarioArtifacts art = prepare_scenario(radial_shell(2.0));
        const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());
        WalkParams wp = scenario_walk_defaults(art);
        wp.tau_cutoff = 60.0;
        const Point start{0.0, 0.0};
        MeasureEstimate ms, mp;
        const double ts = timed(
            [&] { ms = expected_discount_serial(art.V, art.lambda, whole, start, 20000, wp, 7); },
            1);
        const double tp = timed(
            [&] { mp = expected_discount(art.V, art.lambda, whole, start, 20000, wp, 7); }, 1);
        row("exit walks (2e4 replicas)", ts, tp,
            ms.value == mp.value && ms.stderr_ == mp.stderr_);
    }
    return 0;
}
