#ifndef AGMONLAB_FIELD_CORE_HPP
#define AGMONLAB_FIELD_CORE_HPP

#include <array>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace agmonlab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/** Uniform vertex-centered lattice in one or two dimensions.
 * Node (i,j) sits at origin + (i*hx, j*hy); in 1D the y axis collapses
 * to a single row. */
struct Grid {
    int dim = 1;
    std::array<int, 2> n{3, 1};          // nodes per axis
    std::array<double, 2> h{1.0, 1.0};   // spacing per axis
    std::array<double, 2> origin{0.0, 0.0};

    std::size_t node_count() const { return std::size_t(n[0]) * std::size_t(n[1]); }
    std::size_t index(int i, int j = 0) const { return std::size_t(j) * n[0] + i; }
    int ix(std::size_t idx) const { return int(idx % std::size_t(n[0])); }
    int iy(std::size_t idx) const { return int(idx / std::size_t(n[0])); }
    double x(int i) const { return origin[0] + i * h[0]; }
    double y(int j) const { return origin[1] + j * h[1]; }
    Point coord(std::size_t idx) const { return {x(ix(idx)), y(iy(idx))}; }
    double xmax() const { return x(n[0] - 1); }
    double ymax() const { return y(n[1] - 1); }
    double min_h() const { return dim == 2 ? std::min(h[0], h[1]) : h[0]; }

    bool contains(Point p) const;
    /** Nearest node index; p must be inside the extent. */
    std::size_t nearest(Point p) const;
    bool on_boundary(std::size_t idx) const {
        const int i = ix(idx), j = iy(idx);
        if (dim == 1) return i == 0 || i == n[0] - 1;
        return i == 0 || i == n[0] - 1 || j == 0 || j == n[1] - 1;
    }
};

/** Real values on a grid, one per node. */
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.node_count(), fill) {}

    double& operator[](std::size_t idx) { return values[idx]; }
    double operator[](std::size_t idx) const { return values[idx]; }
    double& at(int i, int j = 0) { return values[grid.index(i, j)]; }
    double at(int i, int j = 0) const { return values[grid.index(i, j)]; }
    double max_abs() const;
    double max() const;
};

/** Analytic potential family plus the energy level and the finite ceiling
 * that stands in for hard walls. */
struct PotentialSpec {
    std::string kind;                       // named analytic family
    std::map<std::string, double> params;
    double lambda = 0.0;
    double v_cap = 1e8;
};

/** Evaluate the potential at a point (before the v_cap clamp). */
double potential_value(const PotentialSpec& pot, double x, double y);

/** Deterministic (x, y, radius) layout of the champagne obstacles. */
std::vector<std::array<double, 3>> champagne_bubbles(const PotentialSpec& pot);

enum class NodeClass : unsigned char { Allowed, Forbidden, Outer };

/** Per-node classification into the allowed region, its complement, and the
 * absorbing shell of computational-box boundary nodes. */
struct RegionMask {
    Grid grid;
    std::vector<NodeClass> klass;
    double delta = 0.0;

    NodeClass operator[](std::size_t idx) const { return klass[idx]; }
    bool allowed(std::size_t idx) const { return klass[idx] == NodeClass::Allowed; }
    bool forbidden(std::size_t idx) const { return klass[idx] == NodeClass::Forbidden; }
    bool outer(std::size_t idx) const { return klass[idx] == NodeClass::Outer; }
    std::size_t count(NodeClass c) const;
};

/** Build a grid from per-axis extents [lo,hi] and node counts (>= 3). */
Grid build_grid(const std::vector<std::array<double, 2>>& extent,
                const std::vector<int>& n);

/** Sample min(V, v_cap) at the nodes. Throws if the evaluation is not
 * finite, naming the offending node. */
ScalarField sample_potential(const PotentialSpec& pot, const Grid& grid);

/** Classify nodes: Allowed where V <= lambda + delta (interior only), Outer
 * on the box boundary, Forbidden elsewhere. Throws if no node is allowed. */
RegionMask region_mask(const ScalarField& V, double lambda, double delta = 0.0);

/** Centered second differences; boundary rows are set to NaN since the
 * one-sided values are not meaningful. */
ScalarField laplacian_fd(const ScalarField& f);
ScalarField laplacian_fd_serial(const ScalarField& f);

/** Multilinear interpolation at p (exact at nodes). Throws outside the extent. */
double bilinear_sample(const ScalarField& f, Point p);

} // namespace agmonlab

#endif
