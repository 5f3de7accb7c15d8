#ifndef AGMONLAB_STOCHASTIC_HPP
#define AGMONLAB_STOCHASTIC_HPP

#include "agmonlab/agmon_metric.hpp"
#include "agmonlab/field_core.hpp"
#include "agmonlab/rng.hpp"

#include <cstdint>

namespace agmonlab {

/** One Brownian excursion through the forbidden region, with the
 * accumulated clock tau = int (V - lambda) ds alongside Euclidean time. */
struct ClockedExit {
    enum class Kind : unsigned char { HitE, HitAlpha, HitOuter, Timeout };
    Kind exit_class = Kind::Timeout;
    double agmon_clock = 0.0;   // tau
    double euclid_time = 0.0;   // sigma
    Point exit_point{};
};

struct WalkParams {
    double dt = 1e-4;
    double t_max = 1e4;
    /** Stop once tau exceeds this: the replica's remaining discount is below
     * e^{-cutoff} and is dropped with the timeouts. Discount runs only. */
    double tau_cutoff = std::numeric_limits<double>::infinity();
    /** Locally rescaled clock dt' = dt / (V - lambda): the walk whose own
     * time is the accumulated tau. Exit law must match the uniform clock. */
    bool time_changed = false;
    /** Far from every absorbing set and potential interface, k unit steps
     * collapse into one Gaussian of variance k dt (exact in law for the
     * monitored skeleton up to a crossing probability below e^{-128}).
     * Only regions where V is locally constant qualify, so continuously
     * varying potentials opt out on their own. */
    bool leaps = true;
};

/** Monte Carlo estimate with its reproducibility envelope. */
struct MeasureEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long n_samples = 0;
    std::uint64_t seed = 0;
    double timeout_fraction = 0.0;
    bool warning = false;              // timeout_fraction > 0.5
    double dropped_ceiling = 0.0;      // bound on any dropped replica's discount
    long n_hit_e = 0, n_hit_alpha = 0, n_hit_outer = 0, n_timeout = 0;
};

/** Walk one replica from start until it leaves the bubble (or the clock
 * runs out). Step increments are per-axis Gaussians of variance dt; exits
 * are detected by node classification of the half-step-backed-off
 * position. Throws if start lies outside the domain. */
ClockedExit simulate_exit(const ScalarField& V, double lambda, const BubbleSet& domain,
                          Point start, const WalkParams& params, PhiloxStream& rng);

/** E[e^{-tau}] over n_samples replicas; replicas that time out (or whose
 * discount falls below the cutoff) contribute zero. */
MeasureEstimate expected_discount(const ScalarField& V, double lambda,
                                  const BubbleSet& domain, Point start, long n_samples,
                                  const WalkParams& params, std::uint64_t seed);
MeasureEstimate expected_discount_serial(const ScalarField& V, double lambda,
                                         const BubbleSet& domain, Point start,
                                         long n_samples, const WalkParams& params,
                                         std::uint64_t seed);

/** Fraction of replicas that exit through the allowed boundary. Timeouts
 * count as misses. */
MeasureEstimate harmonic_measure_mc(const ScalarField& V, double lambda,
                                    const BubbleSet& domain, Point start, long n_samples,
                                    const WalkParams& params, std::uint64_t seed);
MeasureEstimate harmonic_measure_mc_serial(const ScalarField& V, double lambda,
                                           const BubbleSet& domain, Point start,
                                           long n_samples, const WalkParams& params,
                                           std::uint64_t seed);

/** Solves Lap h = 0 on the bubble interior with h = 1 on the allowed
 * boundary and h = 0 on the rest, by red-black SOR. The value at a node is
 * the harmonic measure with the pole placed there. */
ScalarField harmonic_measure_pde(const BubbleSet& domain, double tol = 1e-10,
                                 int max_sweeps = 400000,
                                 const ScalarField* warm_start = nullptr);
ScalarField harmonic_measure_pde_serial(const BubbleSet& domain, double tol = 1e-10,
                                        int max_sweeps = 400000,
                                        const ScalarField* warm_start = nullptr);

/** Runs the measure estimator under both clocks and reports whether the
 * two estimates agree within 3 combined standard errors. */
struct TimeChangeReport {
    MeasureEstimate uniform_clock;
    MeasureEstimate rescaled_clock;
    double z = 0.0;
    bool agree = false;
};
TimeChangeReport time_change_equivalence(const ScalarField& V, double lambda,
                                         const BubbleSet& domain, Point start,
                                         long n_samples, const WalkParams& params,
                                         std::uint64_t seed);

/** Fixed-shape pairwise sum (independent of thread count). */
double pairwise_sum(const std::vector<double>& x);

} // namespace agmonlab

#endif
