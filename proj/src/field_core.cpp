#include "agmonlab/field_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace agmonlab {

namespace {

double param(const PotentialSpec& pot, const std::string& key, double fallback) {
    auto it = pot.params.find(key);
    return it == pot.params.end() ? fallback : it->second;
}

// Smoothstep ramp: 0 for t <= 0, 1 for t >= 1.
double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

constexpr double kHardWall = 1e300;   // clamped to v_cap when sampling

} // namespace

std::vector<std::array<double, 3>> champagne_bubbles(const PotentialSpec& pot) {
    const int count = int(param(pot, "bubbles", 16));
    const double sum_radius = param(pot, "sum_radius", 0.5);
    // Golden-angle spiral through the middle of the annulus; the angular
    // offset keeps the reference pole on the negative x axis clear of
    // bubbles for every power-of-two count used by the experiments.
    std::vector<std::array<double, 3>> out;
    out.reserve(count);
    const double r_each = sum_radius / count;
    for (int k = 0; k < count; ++k) {
        const double rad = 0.42 + 0.44 * (k + 0.5) / count;
        const double ang = 0.45 + k * 2.39996322972865332;
        out.push_back({rad * std::cos(ang), rad * std::sin(ang), r_each});
    }
    return out;
}

double potential_value(const PotentialSpec& pot, double x, double y) {
    if (pot.kind == "exact_1d") {
        return 0.5;
    }
    if (pot.kind == "constant") {
        return param(pot, "value", 1.0);
    }
    if (pot.kind == "strip") {
        const double eps = param(pot, "eps", 0.01);
        const double r = std::hypot(x, y);
        // Allowed disk of radius 1 with a smooth clamp of width 0.15.
        return (eps + y * y) * smoothstep((r - 1.0) / 0.15);
    }
    if (pot.kind == "four_squares") {
        const double m = param(pot, "m", 1e4);
        const bool in_x = x >= 0.0 && x <= 2.0, in_y = y >= 0.0 && y <= 2.0;
        if (!in_x || !in_y) return kHardWall;
        const bool right = x > 1.0, top = y > 1.0;
        if (right && top) return 0.0;     // allowed square
        if (!right && !top) return 10.0;  // mildly forbidden square
        return m;                         // insulating pair
    }
    if (pot.kind == "champagne") {
        const double r = std::hypot(x, y);
        if (r <= param(pot, "core_radius", 0.25)) return 0.0;
        if (r > 1.0) return kHardWall;
        for (const auto& b : champagne_bubbles(pot)) {
            const double dx = x - b[0], dy = y - b[1];
            if (dx * dx + dy * dy <= b[2] * b[2]) return kHardWall;
        }
        return param(pot, "c0", 2.0);
    }
    if (pot.kind == "radial_shell") {
        // Constant gap everywhere; the allowed region outside the unit
        // circle is declared by the scenario mask, not by a dip in V.
        return param(pot, "c", 2.0);
    }
    if (pot.kind == "tendril") {
        return param(pot, "c", 35.0);
    }
    throw std::invalid_argument("potential_value: unknown kind '" + pot.kind + "'");
}

bool Grid::contains(Point p) const {
    const double tx = 1e-9 * h[0];
    if (p.x < origin[0] - tx || p.x > xmax() + tx) return false;
    if (dim == 2) {
        const double ty = 1e-9 * h[1];
        if (p.y < origin[1] - ty || p.y > ymax() + ty) return false;
    }
    return true;
}

std::size_t Grid::nearest(Point p) const {
    int i = int(std::lround((p.x - origin[0]) / h[0]));
    i = std::clamp(i, 0, n[0] - 1);
    int j = 0;
    if (dim == 2) {
        j = int(std::lround((p.y - origin[1]) / h[1]));
        j = std::clamp(j, 0, n[1] - 1);
    }
    return index(i, j);
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

double ScalarField::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    return m;
}

std::size_t RegionMask::count(NodeClass c) const {
    std::size_t k = 0;
    for (auto v : klass)
        if (v == c) ++k;
    return k;
}

Grid build_grid(const std::vector<std::array<double, 2>>& extent,
                const std::vector<int>& n) {
    if (extent.size() != n.size() || extent.empty() || extent.size() > 2)
        throw std::invalid_argument("build_grid: need 1 or 2 axes with matching node counts");
    Grid g;
    g.dim = int(extent.size());
    for (int a = 0; a < g.dim; ++a) {
        const double lo = extent[a][0], hi = extent[a][1];
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
            throw std::invalid_argument("build_grid: extent must be finite with max > min");
        if (n[a] < 3)
            throw std::invalid_argument("build_grid: need at least 3 nodes per axis");
        g.n[a] = n[a];
        g.origin[a] = lo;
        g.h[a] = (hi - lo) / (n[a] - 1);
    }
    if (g.dim == 1) {
        g.n[1] = 1;
        g.h[1] = 1.0;
        g.origin[1] = 0.0;
    }
    return g;
}

ScalarField sample_potential(const PotentialSpec& pot, const Grid& grid) {
    ScalarField f(grid);
    for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        const Point p = grid.coord(idx);
        const double raw = potential_value(pot, p.x, p.y);
        if (!std::isfinite(raw))
            throw std::runtime_error("sample_potential: non-finite value at node (" +
                                     std::to_string(grid.ix(idx)) + "," +
                                     std::to_string(grid.iy(idx)) + ")");
        const double v = std::min(raw, pot.v_cap);
        if (v < 0.0)
            throw std::runtime_error("sample_potential: negative potential at node (" +
                                     std::to_string(grid.ix(idx)) + "," +
                                     std::to_string(grid.iy(idx)) + ")");
        f[idx] = v;
    }
    return f;
}

RegionMask region_mask(const ScalarField& V, double lambda, double delta) {
    if (delta < 0.0) throw std::invalid_argument("region_mask: delta must be >= 0");
    for (double v : V.values)
        if (v < 0.0) throw std::invalid_argument("region_mask: potential must be nonnegative");
    RegionMask m;
    m.grid = V.grid;
    m.delta = delta;
    m.klass.resize(V.values.size());
    std::size_t n_allowed = 0;
    for (std::size_t idx = 0; idx < V.values.size(); ++idx) {
        if (V.grid.on_boundary(idx)) {
            m.klass[idx] = NodeClass::Outer;
        } else if (V[idx] <= lambda + delta) {
            m.klass[idx] = NodeClass::Allowed;
            ++n_allowed;
        } else {
            m.klass[idx] = NodeClass::Forbidden;
        }
    }
    if (n_allowed == 0)
        throw std::runtime_error("region_mask: allowed set is empty at this energy");
    return m;
}

namespace {

inline void laplacian_row(const ScalarField& f, ScalarField& out, int j) {
    const Grid& g = f.grid;
    const double ax = 1.0 / (g.h[0] * g.h[0]);
    const double ay = g.dim == 2 ? 1.0 / (g.h[1] * g.h[1]) : 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (g.dim == 2 && (j == 0 || j == g.n[1] - 1)) {
        for (int i = 0; i < g.n[0]; ++i) out.at(i, j) = nan;
        return;
    }
    out.at(0, j) = nan;
    out.at(g.n[0] - 1, j) = nan;
    for (int i = 1; i < g.n[0] - 1; ++i) {
        double v = ax * (f.at(i - 1, j) - 2.0 * f.at(i, j) + f.at(i + 1, j));
        if (g.dim == 2)
            v += ay * (f.at(i, j - 1) - 2.0 * f.at(i, j) + f.at(i, j + 1));
        out.at(i, j) = v;
    }
}

} // namespace

ScalarField laplacian_fd_serial(const ScalarField& f) {
    if (f.grid.dim != 1 && f.grid.dim != 2)
        throw std::invalid_argument("laplacian_fd: 1D/2D only");
    ScalarField out(f.grid);
    for (int j = 0; j < f.grid.n[1]; ++j) laplacian_row(f, out, j);
    return out;
}

ScalarField laplacian_fd(const ScalarField& f) {
    if (f.grid.dim != 1 && f.grid.dim != 2)
        throw std::invalid_argument("laplacian_fd: 1D/2D only");
    ScalarField out(f.grid);
    const int ny = f.grid.n[1];
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) laplacian_row(f, out, j);
    return out;
}

double bilinear_sample(const ScalarField& f, Point p) {
    const Grid& g = f.grid;
    if (!g.contains(p)) throw std::invalid_argument("bilinear_sample: point outside extent");
    int i0 = int(std::floor((p.x - g.origin[0]) / g.h[0]));
    i0 = std::clamp(i0, 0, g.n[0] - 2);
    const double tx = (p.x - g.x(i0)) / g.h[0];
    if (g.dim == 1)
        return (1.0 - tx) * f.at(i0) + tx * f.at(i0 + 1);
    int j0 = int(std::floor((p.y - g.origin[1]) / g.h[1]));
    j0 = std::clamp(j0, 0, g.n[1] - 2);
    const double ty = (p.y - g.y(j0)) / g.h[1];
    return (1.0 - tx) * (1.0 - ty) * f.at(i0, j0) + tx * (1.0 - ty) * f.at(i0 + 1, j0) +
           (1.0 - tx) * ty * f.at(i0, j0 + 1) + tx * ty * f.at(i0 + 1, j0 + 1);
}

} // namespace agmonlab
