#include "agmonlab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agmonlab {

namespace {

constexpr std::size_t kDotBlock = 4096;

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* who) {
    if (a.grid.n != b.grid.n || a.grid.dim != b.grid.dim ||
        a.grid.h != b.grid.h || a.grid.origin != b.grid.origin)
        throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

inline void hamiltonian_row(const ScalarField& V, const ScalarField& v,
                            ScalarField& out, int j) {
    const Grid& g = v.grid;
    const double ax = 0.5 / (g.h[0] * g.h[0]);
    const double ay = g.dim == 2 ? 0.5 / (g.h[1] * g.h[1]) : 0.0;
    const int nx = g.n[0];
    if (g.dim == 2 && (j == 0 || j == g.n[1] - 1)) {
        for (int i = 0; i < nx; ++i) out.at(i, j) = 0.0;
        return;
    }
    auto vb = [&](int i, int jj) {
        return v.grid.on_boundary(g.index(i, jj)) ? 0.0 : v.at(i, jj);
    };
    out.at(0, j) = 0.0;
    out.at(nx - 1, j) = 0.0;
    for (int i = 1; i < nx - 1; ++i) {
        const double center = vb(i, j);
        double acc = ax * (2.0 * center - vb(i - 1, j) - vb(i + 1, j));
        if (g.dim == 2)
            acc += ay * (2.0 * center - vb(i, j - 1) - vb(i, j + 1));
        out.at(i, j) = acc + V.at(i, j) * center;
    }
}

} // namespace

double deterministic_dot(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    const std::size_t nblocks = (n + kDotBlock - 1) / kDotBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (long long bi = 0; bi < (long long)nblocks; ++bi) {
        const std::size_t lo = std::size_t(bi) * kDotBlock;
        const std::size_t hi = std::min(lo + kDotBlock, n);
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += a[k] * b[k];
        partial[bi] = s;
    }
    // fixed pairwise tree over the block sums
    for (std::size_t stride = 1; stride < nblocks; stride *= 2)
        for (std::size_t k = 0; k + stride < nblocks; k += 2 * stride)
            partial[k] += partial[k + stride];
    return nblocks ? partial[0] : 0.0;
}

ScalarField apply_hamiltonian_serial(const ScalarField& V, const ScalarField& v) {
    check_same_grid(V, v, "apply_hamiltonian");
    ScalarField out(v.grid);
    for (int j = 0; j < v.grid.n[1]; ++j) hamiltonian_row(V, v, out, j);
    return out;
}

ScalarField apply_hamiltonian(const ScalarField& V, const ScalarField& v) {
    check_same_grid(V, v, "apply_hamiltonian");
    ScalarField out(v.grid);
    const int ny = v.grid.n[1];
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) hamiltonian_row(V, v, out, j);
    return out;
}

double rayleigh_quotient(const ScalarField& V, const ScalarField& v) {
    check_same_grid(V, v, "rayleigh_quotient");
    const ScalarField Hv = apply_hamiltonian(V, v);
    // boundary entries of Hv are zero, and v is read as zero there, so the
    // plain dot products implement the interior inner product
    std::vector<double> vz = v.values;
    for (std::size_t idx = 0; idx < vz.size(); ++idx)
        if (v.grid.on_boundary(idx)) vz[idx] = 0.0;
    const double vv = deterministic_dot(vz, vz);
    if (vv == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
    return deterministic_dot(vz, Hv.values) / vv;
}

namespace {

// Jacobi-preconditioned CG for H w = rhs on interior nodes.
// Returns the relative residual reached.
double pcg_solve(const ScalarField& V, const std::vector<double>& rhs,
                 std::vector<double>& w, double rel_tol, int max_iter) {
    const Grid& g = V.grid;
    const std::size_t n = g.node_count();
    std::vector<double> diag(n, 1.0);
    const double ax = 1.0 / (g.h[0] * g.h[0]);
    const double ay = g.dim == 2 ? 1.0 / (g.h[1] * g.h[1]) : 0.0;
    for (std::size_t idx = 0; idx < n; ++idx)
        if (!g.on_boundary(idx)) diag[idx] = ax + ay + V[idx];

    ScalarField wf(g);
    w.assign(n, 0.0);
    std::vector<double> r = rhs;
    for (std::size_t idx = 0; idx < n; ++idx)
        if (g.on_boundary(idx)) r[idx] = 0.0;

    std::vector<double> z(n), p(n), Ap;
    auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx)
            zz[idx] = g.on_boundary(idx) ? 0.0 : rr[idx] / diag[idx];
    };

    precondition(r, z);
    p = z;
    double rz = deterministic_dot(r, z);
    const double rhs_norm = std::sqrt(std::max(deterministic_dot(r, r), 1e-300));

    for (int it = 0; it < max_iter; ++it) {
        wf.values = p;
        const ScalarField Apf = apply_hamiltonian(V, wf);
        const double pAp = deterministic_dot(p, Apf.values);
        if (pAp <= 0.0) break;
        const double alpha = rz / pAp;
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx) {
            w[idx] += alpha * p[idx];
            r[idx] -= alpha * Apf.values[idx];
        }
        const double rnorm = std::sqrt(deterministic_dot(r, r));
        if (rnorm <= rel_tol * rhs_norm) return rnorm / rhs_norm;
        precondition(r, z);
        const double rz_new = deterministic_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx)
            p[idx] = z[idx] + beta * p[idx];
    }
    return std::sqrt(deterministic_dot(r, r)) / rhs_norm;
}

} // namespace

EigenPair ground_state(const ScalarField& V, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("ground_state: tol must be positive");
    const Grid& g = V.grid;
    const std::size_t n = g.node_count();

    ScalarField v(g, 0.0);
    std::size_t interior = 0;
    for (std::size_t idx = 0; idx < n; ++idx)
        if (!g.on_boundary(idx)) {
            v[idx] = 1.0;
            ++interior;
        }
    if (interior == 0) throw std::invalid_argument("ground_state: no interior nodes");

    double lambda = 0.0, residual = 0.0;
    int it = 0;
    std::vector<double> w;
    for (it = 1; it <= max_iter; ++it) {
        pcg_solve(V, v.values, w, 1e-12, 20000);
        const double norm = std::sqrt(deterministic_dot(w, w));
        if (!(norm > 0.0)) throw std::runtime_error("ground_state: inverse iteration collapsed");
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx)
            v[idx] = g.on_boundary(idx) ? 0.0 : w[idx] / norm;

        lambda = rayleigh_quotient(V, v);
        const ScalarField Hv = apply_hamiltonian(V, v);
        double rr = 0.0;
        for (std::size_t idx = 0; idx < n; ++idx) {
            const double d = Hv[idx] - lambda * v[idx];
            rr += d * d;
        }
        residual = std::sqrt(rr) / std::sqrt(deterministic_dot(v.values, v.values));
        if (residual <= tol) break;
    }
    if (residual > tol)
        throw std::runtime_error("ground_state: no convergence after " +
                                 std::to_string(max_iter) +
                                 " iterations (residual " + std::to_string(residual) + ")");

    // sup-norm one, positive at the maximum of |u|
    double amax = 0.0;
    std::size_t arg = 0;
    for (std::size_t idx = 0; idx < n; ++idx)
        if (std::fabs(v[idx]) > amax) {
            amax = std::fabs(v[idx]);
            arg = idx;
        }
    const double scale = (v[arg] > 0.0 ? 1.0 : -1.0) / amax;
    for (double& x : v.values) x *= scale;

    EigenPair pair;
    pair.lambda = lambda;
    pair.u = std::move(v);
    pair.residual = residual;
    pair.iterations = it;
    return pair;
}

namespace {

// Tridiagonal Thomas solve for the 1D pinned problem.
ScalarField pinned_state_1d(const ScalarField& V, double lambda, const RegionMask& mask,
                            double boundary_value) {
    const Grid& g = V.grid;
    const int nx = g.n[0];
    const double ax = 0.5 / (g.h[0] * g.h[0]);
    std::vector<double> a(nx, 0.0), b(nx, 1.0), c(nx, 0.0), d(nx, 0.0);
    for (int i = 0; i < nx; ++i) {
        const std::size_t idx = g.index(i);
        if (mask.outer(idx)) {
            d[i] = 0.0;
        } else if (mask.allowed(idx)) {
            d[i] = boundary_value;
        } else {
            a[i] = -ax;
            b[i] = 2.0 * ax + (V[idx] - lambda);
            c[i] = -ax;
            d[i] = 0.0;
        }
    }
    for (int i = 1; i < nx; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    ScalarField u(g);
    u.values[nx - 1] = d[nx - 1] / b[nx - 1];
    for (int i = nx - 2; i >= 0; --i)
        u.values[i] = (d[i] - c[i] * u.values[i + 1]) / b[i];
    return u;
}

} // namespace

ScalarField pinned_state(const ScalarField& V, double lambda, const RegionMask& mask,
                         double boundary_value, double tol, int max_iter) {
    if (mask.grid.n != V.grid.n || mask.grid.dim != V.grid.dim)
        throw std::invalid_argument("pinned_state: grid mismatch");
    if (V.grid.dim == 1) return pinned_state_1d(V, lambda, mask, boundary_value);

    const Grid& g = V.grid;
    const std::size_t n = g.node_count();
    const double ax = 0.5 / (g.h[0] * g.h[0]);
    const double ay = 0.5 / (g.h[1] * g.h[1]);

    // CG on forbidden unknowns; allowed nodes carry the boundary data.
    std::vector<double> diag(n, 1.0), u(n, 0.0), r(n, 0.0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (mask.allowed(idx)) u[idx] = boundary_value;
        if (mask.forbidden(idx)) {
            const double vml = V[idx] - lambda;
            if (!(vml > 0.0))
                throw std::runtime_error("pinned_state: V - lambda must be positive on the forbidden set");
            diag[idx] = 2.0 * (ax + ay) + vml;
        }
    }

    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx) {
            if (!mask.forbidden(idx)) {
                y[idx] = 0.0;
                continue;
            }
            const int i = g.ix(idx), j = g.iy(idx);
            auto xf = [&](int ii, int jj) {
                const std::size_t k = g.index(ii, jj);
                return mask.forbidden(k) ? x[k] : 0.0;
            };
            y[idx] = diag[idx] * x[idx] -
                     ax * (xf(i - 1, j) + xf(i + 1, j)) -
                     ay * (xf(i, j - 1) + xf(i, j + 1));
        }
    };

    // rhs: coupling of forbidden rows to the pinned allowed values
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (!mask.forbidden(idx)) continue;
        const int i = g.ix(idx), j = g.iy(idx);
        auto pinned = [&](int ii, int jj) {
            const std::size_t k = g.index(ii, jj);
            return mask.allowed(k) ? boundary_value : 0.0;
        };
        r[idx] = ax * (pinned(i - 1, j) + pinned(i + 1, j)) +
                 ay * (pinned(i, j - 1) + pinned(i, j + 1));
    }

    std::vector<double> x(n, 0.0), z(n, 0.0), p(n, 0.0), Ap(n, 0.0);
    const double rhs_norm = std::sqrt(std::max(deterministic_dot(r, r), 1e-300));
    auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx)
            zz[idx] = mask.forbidden(idx) ? rr[idx] / diag[idx] : 0.0;
    };
    precondition(r, z);
    p = z;
    double rz = deterministic_dot(r, z);
    bool done = false;
    for (int it = 0; it < max_iter && !done; ++it) {
        apply(p, Ap);
        const double pAp = deterministic_dot(p, Ap);
        if (pAp <= 0.0) break;
        const double alpha = rz / pAp;
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx) {
            x[idx] += alpha * p[idx];
            r[idx] -= alpha * Ap[idx];
        }
        if (std::sqrt(deterministic_dot(r, r)) <= tol * rhs_norm) done = true;
        precondition(r, z);
        const double rz_new = deterministic_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)n; ++idx)
            p[idx] = z[idx] + beta * p[idx];
    }
    if (!done)
        throw std::runtime_error("pinned_state: CG did not reach tolerance");

    ScalarField out(g);
    for (std::size_t idx = 0; idx < n; ++idx)
        out[idx] = mask.forbidden(idx) ? x[idx] : u[idx];
    return out;
}

} // namespace agmonlab
