#ifndef AGMONLAB_BOUNDS_HPP
#define AGMONLAB_BOUNDS_HPP

#include "agmonlab/agmon_metric.hpp"
#include "agmonlab/scenarios.hpp"
#include "agmonlab/stochastic.hpp"

#include <map>
#include <vector>

namespace agmonlab {

struct BoundConfig {
    double c_eps = 1.0;                 // constant in front of the decay term
    double eps = 0.1;                   // exponent slack in (0,1)
    std::vector<double> alpha_grid;     // strictly increasing, positive
    double delta = 0.0;                 // allowed-region inflation for the tube check
    double sharp_factor = 0.5;          // |u| >= factor * e^{-rho} marks a sharp point
    double tube_floor = 0.01;           // consistency floor for sharp points
};

std::vector<double> log_spaced(double lo, double hi, int n);

/** Provider of the exit probability omega_x(allowed boundary) within the
 * level-alpha bubble. Either the deterministic relaxation oracle or the
 * Monte Carlo estimator, both cached. */
class MeasureBackend {
  public:
    virtual ~MeasureBackend() = default;
    virtual MeasureEstimate omega(Point x, double alpha) = 0;
};

class PdeMeasureBackend : public MeasureBackend {
  public:
    PdeMeasureBackend(const DistanceField& dist, double tol = 1e-10);
    MeasureEstimate omega(Point x, double alpha) override;

  private:
    const DistanceField& dist_;
    double tol_;
    std::map<double, ScalarField> cache_;
};

class McMeasureBackend : public MeasureBackend {
  public:
    McMeasureBackend(const ScalarField& V, double lambda, const DistanceField& dist,
                     long n_samples, WalkParams params, std::uint64_t seed);
    MeasureEstimate omega(Point x, double alpha) override;

  private:
    const ScalarField& V_;
    double lambda_;
    const DistanceField& dist_;
    long n_samples_;
    WalkParams params_;
    std::uint64_t seed_;
    std::map<double, BubbleSet> bubbles_;
    std::map<std::tuple<std::size_t, double, std::uint64_t>, MeasureEstimate> cache_;
};

/** boundary_sup * e^{-rho} with per-node validity from the sign certificate
 * of the distance Laplacian. */
struct PointwiseBoundField {
    ScalarField bound;
    std::vector<std::uint8_t> valid;
};
PointwiseBoundField agmon_pointwise_bound(const DistanceField& dist, double boundary_sup,
                                          const DistanceLaplacian& dlap);

/** min over admissible alpha (alpha > rho(x)) of
 * c_eps e^{-(1-eps) alpha} + omega(x, alpha) * sup_norm. */
struct BubbleBound {
    double value = 0.0;
    double alpha_star = 0.0;
    double omega_star = 0.0;
    double omega_stderr = 0.0;
};
BubbleBound bubble_bound(Point x, const DistanceField& dist, MeasureBackend& omega,
                         const BoundConfig& cfg, double sup_norm = 1.0);

/** Statistically safe upper value from the discount estimate. */
double discount_bound(const MeasureEstimate& discount, double boundary_sup);

/** Tube/trivial diagnostics at a set of points. */
struct TubePoint {
    Point x;
    bool sharp = false;
    double omega = 0.0;        // exit probability over the whole forbidden region
    double sqrt_decay = 0.0;   // sqrt(e^{-rho_delta})
    double u_abs = 0.0;
};
struct TubeReport {
    std::vector<TubePoint> points;
    double best_fit_c = 0.0;   // min over sharp points of omega / sqrt_decay
    bool consistent = true;    // no sharp point below the floor
    bool trivial_ok = true;    // omega >= 0.1 |u| / sup_norm everywhere (minus slack)
};
TubeReport tube_check(const std::vector<Point>& pts, const ScalarField& u, double sup_norm,
                      const ScalarField& omega_full, const DistanceField& rho_delta,
                      const BoundConfig& cfg, double stat_slack = 0.0);

/** Joined per-point record; the CSV column set of the bounds command. */
struct BoundReport {
    Point point;
    double u_abs = 0.0;
    double rho = 0.0;
    double agmon_bound = 0.0;
    bool drho_flag = false;
    double thm1_value = 0.0;
    double alpha_star = 0.0;
    double omega_star = 0.0;
    double fk_value = 0.0;
    double fk_stderr = 0.0;
    double tube_lhs = 0.0;
    double tube_rhs = 0.0;
    double trivial_lhs = 0.0;
    double slack = 0.0;
};

struct BoundReportInputs {
    const ScenarioArtifacts& art;
    const DistanceLaplacian& dlap;
    MeasureBackend& omega_backend;
    const ScalarField& omega_full;       // exit probability over the full forbidden set
    const BoundConfig& cfg;
    long discount_samples = 10000;
    WalkParams walk;
    std::uint64_t seed = 1;
};

/** Evaluates every bound at each point and enforces soundness: a valid
 * bound below |u| minus the statistical/discretization slack is a hard
 * error. */
std::vector<BoundReport> bound_report(const BoundReportInputs& in,
                                      const std::vector<Point>& pts);

} // namespace agmonlab

#endif
