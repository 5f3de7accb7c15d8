#ifndef AGMONLAB_SCENARIOS_HPP
#define AGMONLAB_SCENARIOS_HPP

#include "agmonlab/agmon_metric.hpp"
#include "agmonlab/field_core.hpp"
#include "agmonlab/stochastic.hpp"

#include <string>
#include <vector>

namespace agmonlab {

/** A named experiment: potential family, canonical grid, energy policy and
 * query points. Plain data; everything derived is computed on demand. */
struct Scenario {
    std::string name;
    PotentialSpec potential;
    Grid grid;
    bool eigensolve = false;     // otherwise the energy is fixed
    double lambda_fixed = 0.0;
    double delta = 0.0;
    std::vector<Point> query_points;
    struct Window {
        double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    } sample_window;             // where soundness sweeps draw their points
    bool open_boundary = false;  // box truncates an unbounded domain (reported, not certified)
};

Scenario exact_1d(double x_max = 20.0);
Scenario strip(double eps = 0.01);
Scenario four_squares(double m = 1e4);
Scenario champagne(int bubble_count = 16, double sum_radius = 0.5);
Scenario radial_shell(double c = 2.0);
Scenario tendril(double c = 35.0);

/** Construct by name with parameter overrides (unknown name throws). */
Scenario scenario_by_name(const std::string& name,
                          const std::map<std::string, double>& params);

/** Allowed-region classification for a scenario. The 1D line, shell,
 * champagne and tendril geometries declare their allowed sets directly
 * (the potential keeps its forbidden value there); strip and four_squares
 * classify through the sampled potential. */
RegionMask scenario_mask(const Scenario& scen, const ScalarField& V, double lambda);

/** Everything the experiments need, computed once. */
struct ScenarioArtifacts {
    Scenario scenario;
    ScalarField V;
    double lambda = 0.0;
    RegionMask mask;
    ScalarField u;               // eigenstate or pinned boundary-value state
    double solver_residual = 0.0;
    double boundary_sup = 0.0;   // max |u| on allowed nodes facing the forbidden set
    double sup_norm = 0.0;       // max |u| overall
    DistanceField dist;
};

struct PrepareOptions {
    double eig_tol = 1e-7;
    int eig_max_iter = 80;
};

ScenarioArtifacts prepare_scenario(const Scenario& scen, const PrepareOptions& opt = {});

/** Default walk discretization: dt = h_min^2/4 and a horizon that keeps the
 * dropped-discount ceiling below 1e-6. */
WalkParams scenario_walk_defaults(const ScenarioArtifacts& art);

/** max |u| / sup over forbidden nodes adjacent to the box shell; the box is
 * far enough when this is below 1e-8. Not meaningful for open boundaries. */
double truncation_certificate(const ScenarioArtifacts& art);

/** Deterministic forbidden sample points inside the scenario window. */
std::vector<Point> sample_forbidden_points(const ScenarioArtifacts& art, int count,
                                           std::uint64_t seed);

} // namespace agmonlab

#endif
