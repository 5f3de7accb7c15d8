#ifndef AGMONLAB_AGMON_METRIC_HPP
#define AGMONLAB_AGMON_METRIC_HPP

#include "agmonlab/field_core.hpp"

#include <cstdint>
#include <limits>

namespace agmonlab {

/** Distance to the allowed region in the metric with line element
 * sqrt(2 max(V - lambda, 0)) |dx|, together with the coefficient field and
 * the source mask that produced it. */
struct DistanceField {
    enum class Method { FastMarching, Dijkstra };

    ScalarField rho;       // +inf on nodes not connected to the source
    RegionMask source;
    ScalarField coeff;     // c(x) = sqrt(2 max(V - lambda, 0))
    Method method = Method::FastMarching;
    double max_residual = 0.0;   // upwind certificate (fast marching only)

    double at(std::size_t idx) const { return rho[idx]; }
    /** Distance at the node nearest to p. */
    double at_point(Point p) const { return rho[rho.grid.nearest(p)]; }
};

/** Sublevel set of the distance inside the forbidden region, with its two
 * boundary layers split apart. */
struct BubbleSet {
    enum class Class : unsigned char { Inside, BoundaryE, BoundaryAlpha, Outside };

    Grid grid;
    std::vector<Class> klass;
    double alpha = 0.0;
    RegionMask mask;       // copy of the source classification
    ScalarField rho;

    Class operator[](std::size_t idx) const { return klass[idx]; }
    bool inside(std::size_t idx) const { return klass[idx] == Class::Inside; }
    /** Whether the level alpha admits the query point (alpha > rho(x)). */
    bool admits(Point p) const { return alpha > rho[grid.nearest(p)]; }
    std::size_t count(Class c) const;
};

struct Polyline {
    std::vector<Point> points;   // >= 2, consecutive points distinct
};

/** Line-integral cost of a polyline under the metric, by composite midpoint
 * quadrature with n_quad points per segment. Points must lie inside the
 * grid extent. */
double path_cost(const PotentialSpec& pot, double lambda, const Polyline& gamma,
                 int n_quad, const Grid& domain);

/** Single-pass fast-marching solve of |grad rho| = c with rho = 0 on the
 * allowed set. Zero-coefficient nodes propagate at no cost. The returned
 * field carries the maximal upwind residual over accepted nodes. */
DistanceField fmm_distance(const ScalarField& V, double lambda, const RegionMask& mask);

/** Shortest path over the 8-neighbor grid graph (2-neighbor in 1D) with
 * edge weight = mean endpoint coefficient times Euclidean edge length.
 * Independent cross-check for fmm_distance. */
DistanceField dijkstra_distance(const ScalarField& V, double lambda, const RegionMask& mask);

/** Recompute the upwind residual of a distance field node by node
 * (diagnostic; fast marching should be at round-off). */
double upwind_residual(const DistanceField& dist, std::size_t idx);

/** Agreement between the two distance solvers. In the bulk (several cells
 * from a coefficient jump) the graph metric differs from the eikonal one by
 * metrication only; within the first layers the two discretizations differ
 * by up to one edge's worth of coefficient, which is reported separately,
 * scaled so that <= 1 is in bounds. */
struct OracleAgreement {
    double bulk_worst = 0.0;         // max |f-d| / max(f, h) over bulk nodes
    double near_worst_scaled = 0.0;  // max (|f-d| - 0.08 max(f,h)) / (c l_diag)
    std::size_t bulk_nodes = 0;
    std::size_t near_nodes = 0;
};
OracleAgreement compare_distance_fields(const DistanceField& fmm_field,
                                        const DistanceField& dijkstra_field);

/** Classify the sublevel set rho <= alpha. */
BubbleSet bubble(const DistanceField& dist, double alpha);

/** Discrete Laplacian of the distance with a sign certificate. Nodes on the
 * cut locus (two cheapest descent directions more than 45 degrees apart),
 * nodes with incomplete stencils, and allowed/outer nodes are excluded
 * from certification. */
struct DistanceLaplacian {
    ScalarField lap;
    std::vector<std::uint8_t> nonneg;      // lap >= -tol among certified nodes
    std::vector<std::uint8_t> certified;
    double tol = 0.0;
};
DistanceLaplacian distance_laplacian(const DistanceField& dist, double tol = -1.0);

inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

} // namespace agmonlab

#endif
