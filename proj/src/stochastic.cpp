#include "agmonlab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agmonlab {

namespace {

enum class NodeFate : unsigned char { Continue, HitE, HitAlpha, HitOuter };

inline NodeFate classify(const BubbleSet& domain, std::size_t node) {
    if (domain.mask.outer(node)) return NodeFate::HitOuter;
    if (domain.mask.allowed(node)) return NodeFate::HitE;
    if (domain.klass[node] == BubbleSet::Class::Inside) return NodeFate::Continue;
    return NodeFate::HitAlpha;
}

inline ClockedExit::Kind to_kind(NodeFate f) {
    switch (f) {
        case NodeFate::HitE: return ClockedExit::Kind::HitE;
        case NodeFate::HitAlpha: return ClockedExit::Kind::HitAlpha;
        default: return ClockedExit::Kind::HitOuter;
    }
}

// Bounds on the local clock rescale keep the walk's spatial step between
// h/16 and 2h regardless of how extreme V - lambda gets.
struct StepScale {
    double ds_min, ds_max;
};

} // namespace

ClockedExit simulate_exit(const ScalarField& V, double lambda, const BubbleSet& domain,
                          Point start, const WalkParams& params, PhiloxStream& rng) {
    const Grid& g = V.grid;
    if (!g.contains(start))
        throw std::invalid_argument("simulate_exit: start outside the grid");
    if (!(params.dt > 0.0)) throw std::invalid_argument("simulate_exit: dt must be positive");

    ClockedExit out;
    const NodeFate f0 = classify(domain, g.nearest(start));
    if (f0 != NodeFate::Continue) {
        if (f0 == NodeFate::HitE) {
            out.exit_class = ClockedExit::Kind::HitE;
            out.exit_point = start;
            return out;
        }
        throw std::invalid_argument("simulate_exit: start outside the domain");
    }

    const bool two_d = g.dim == 2;
    const double hmin = g.min_h();
    const StepScale scale{params.dt / 64.0, 4.0 * hmin * hmin};

    double px = start.x, py = start.y;
    double tau = 0.0, sigma = 0.0;
    const double sqrt_dt = std::sqrt(params.dt);

    for (;;) {
        double ds = params.dt, step = sqrt_dt;
        if (params.time_changed) {
            const double local = std::max(bilinear_sample(V, {px, py}) - lambda, 1e-12);
            ds = std::clamp(params.dt / local, scale.ds_min, scale.ds_max);
            step = std::sqrt(ds);
        }
        const double nx = px + step * rng.normal();
        const double ny = two_d ? py + step * rng.normal() : py;

        if (!g.contains({nx, ny})) {
            out.exit_class = ClockedExit::Kind::HitOuter;
            out.exit_point = {0.5 * (px + nx), 0.5 * (py + ny)};
            out.agmon_clock = std::max(tau + 0.5 * (bilinear_sample(V, {px, py}) - lambda) * ds, 0.0);
            out.euclid_time = sigma + 0.5 * ds;
            return out;
        }

        // half-step back-off: absorption is monitored at the midpoint
        const Point mid{0.5 * (px + nx), 0.5 * (py + ny)};
        const NodeFate fate = classify(domain, g.nearest(mid));
        if (fate != NodeFate::Continue) {
            tau += 0.5 * (bilinear_sample(V, mid) - lambda) * ds;
            out.exit_class = to_kind(fate);
            out.exit_point = mid;
            out.agmon_clock = std::max(tau, 0.0);
            out.euclid_time = sigma + 0.5 * ds;
            return out;
        }

        tau += (bilinear_sample(V, {nx, ny}) - lambda) * ds;
        sigma += ds;
        px = nx;
        py = ny;
        if (sigma > params.t_max || tau > params.tau_cutoff) {
            out.exit_class = ClockedExit::Kind::Timeout;
            out.exit_point = {px, py};
            out.agmon_clock = std::max(tau, 0.0);
            out.euclid_time = sigma;
            return out;
        }
    }
}

namespace {

// Precomputed per-domain tables for the batched estimators: the node fate
// map plus the cell distance to the nearest absorbing node or potential
// interface (the leap radius).
struct WalkCache {
    const Grid* g = nullptr;
    std::vector<unsigned char> fate;
    std::vector<std::uint16_t> safe;
    const double* V = nullptr;
    double ox = 0, oy = 0, ihx = 0, ihy = 0;
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    int nx = 0, ny = 0;
    bool two_d = false;
    double hmin = 0;

    std::size_t node_of(double x, double y) const {
        int i = int((x - ox) * ihx + 0.5);
        i = i < 0 ? 0 : (i >= nx ? nx - 1 : i);
        if (!two_d) return std::size_t(i);
        int j = int((y - oy) * ihy + 0.5);
        j = j < 0 ? 0 : (j >= ny ? ny - 1 : j);
        return std::size_t(j) * nx + i;
    }
    double vlerp(double x, double y) const {
        double fx = (x - ox) * ihx;
        int i0 = int(fx);
        i0 = i0 < 0 ? 0 : (i0 > nx - 2 ? nx - 2 : i0);
        fx -= i0;
        if (!two_d) {
            const double* v = V + i0;
            return v[0] + fx * (v[1] - v[0]);
        }
        double fy = (y - oy) * ihy;
        int j0 = int(fy);
        j0 = j0 < 0 ? 0 : (j0 > ny - 2 ? ny - 2 : j0);
        fy -= j0;
        const double* v0 = V + std::size_t(j0) * nx + i0;
        const double* v1 = v0 + nx;
        const double a = v0[0] + fx * (v0[1] - v0[0]);
        const double b = v1[0] + fx * (v1[1] - v1[0]);
        return a + fy * (b - a);
    }
};

WalkCache build_walk_cache(const ScalarField& V, const BubbleSet& domain) {
    WalkCache c;
    const Grid& g = V.grid;
    c.g = &g;
    c.V = V.values.data();
    c.nx = g.n[0];
    c.ny = g.n[1];
    c.two_d = g.dim == 2;
    c.ox = g.origin[0];
    c.oy = g.origin[1];
    c.ihx = 1.0 / g.h[0];
    c.ihy = 1.0 / g.h[1];
    c.xlo = g.origin[0] - 1e-9 * g.h[0];
    c.xhi = g.xmax() + 1e-9 * g.h[0];
    c.ylo = g.origin[1] - 1e-9 * g.h[1];
    c.yhi = g.ymax() + 1e-9 * g.h[1];
    c.hmin = g.min_h();

    const std::size_t n = g.node_count();
    c.fate.resize(n);
    for (std::size_t idx = 0; idx < n; ++idx)
        c.fate[idx] = (unsigned char)classify(domain, idx);

    c.safe.assign(n, 0xFFFF);
    std::vector<std::size_t> frontier, next;
    for (std::size_t idx = 0; idx < n; ++idx) {
        bool seed = c.fate[idx] != (unsigned char)NodeFate::Continue;
        if (!seed) {
            const int i = g.ix(idx), j = g.iy(idx);
            const double v0 = V[idx];
            auto differs = [&](int ii, int jj) {
                const double v = V.at(ii, jj);
                return std::fabs(v - v0) > 1e-12 * (1.0 + std::fabs(v0));
            };
            if (i > 0 && differs(i - 1, j)) seed = true;
            if (!seed && i < g.n[0] - 1 && differs(i + 1, j)) seed = true;
            if (!seed && g.dim == 2 && j > 0 && differs(i, j - 1)) seed = true;
            if (!seed && g.dim == 2 && j < g.n[1] - 1 && differs(i, j + 1)) seed = true;
        }
        if (seed) {
            c.safe[idx] = 0;
            frontier.push_back(idx);
        }
    }
    std::uint16_t level = 0;
    while (!frontier.empty() && level < 0xFFFE) {
        ++level;
        next.clear();
        for (std::size_t idx : frontier) {
            const int i = g.ix(idx), j = g.iy(idx);
            auto visit = [&](int ii, int jj) {
                const std::size_t nb = g.index(ii, jj);
                if (c.safe[nb] == 0xFFFF) {
                    c.safe[nb] = level;
                    next.push_back(nb);
                }
            };
            if (i > 0) visit(i - 1, j);
            if (i < g.n[0] - 1) visit(i + 1, j);
            if (g.dim == 2) {
                if (j > 0) visit(i, j - 1);
                if (j < g.n[1] - 1) visit(i, j + 1);
            }
        }
        frontier.swap(next);
    }
    return c;
}

// Batched counterpart of simulate_exit: same stepping rules, with the leap
// acceleration and without per-call validation.
ClockedExit walk_kernel(const WalkCache& c, Point start, const WalkParams& p,
                        PhiloxStream& rng) {
    ClockedExit out;
    const NodeFate f0 = NodeFate(c.fate[c.node_of(start.x, start.y)]);
    if (f0 != NodeFate::Continue) {
        out.exit_class = f0 == NodeFate::HitE ? ClockedExit::Kind::HitE
                                              : ClockedExit::Kind::HitOuter;
        out.exit_point = start;
        return out;
    }

    const double sqrt_dt = std::sqrt(p.dt);
    const double ds_min = p.dt / 64.0, ds_max = 4.0 * c.hmin * c.hmin;
    const bool leaps = p.leaps && !p.time_changed;
    double px = start.x, py = start.y;
    double tau = 0.0, sigma = 0.0;

    for (;;) {
        double ds = p.dt, step = sqrt_dt;
        if (leaps) {
            const double d_safe =
                (double(c.safe[c.node_of(px, py)]) - 2.0) * c.hmin;
            if (d_safe > 16.0 * sqrt_dt) {
                const double kk = (d_safe / 8.0) * (d_safe / 8.0) / p.dt;
                const double k = std::min(kk, 1048576.0);
                ds = std::floor(k) * p.dt;
                step = std::sqrt(ds);
            }
        } else if (p.time_changed) {
            const double local = std::max(c.vlerp(px, py) - p.lambda_hint, 1e-12);
            ds = std::clamp(p.dt / local, ds_min, ds_max);
            step = std::sqrt(ds);
        }

        const double nx_ = px + step * rng.normal();
        const double ny_ = c.two_d ? py + step * rng.normal() : py;

        if (nx_ < c.xlo || nx_ > c.xhi || (c.two_d && (ny_ < c.ylo || ny_ > c.yhi))) {
            out.exit_class = ClockedExit::Kind::HitOuter;
            out.exit_point = {0.5 * (px + nx_), 0.5 * (py + ny_)};
            out.agmon_clock =
                std::max(tau + 0.5 * (c.vlerp(px, py) - p.lambda_hint) * ds, 0.0);
            out.euclid_time = sigma + 0.5 * ds;
            return out;
        }

        const double mx = 0.5 * (px + nx_), my = 0.5 * (py + ny_);
        const NodeFate fate = NodeFate(c.fate[c.node_of(mx, my)]);
        if (fate != NodeFate::Continue) {
            tau += 0.5 * (c.vlerp(mx, my) - p.lambda_hint) * ds;
            out.exit_class = to_kind(fate);
            out.exit_point = {mx, my};
            out.agmon_clock = std::max(tau, 0.0);
            out.euclid_time = sigma + 0.5 * ds;
            return out;
        }

        tau += (c.vlerp(nx_, ny_) - p.lambda_hint) * ds;
        sigma += ds;
        px = nx_;
        py = ny_;
        if (sigma > p.t_max || tau > p.tau_cutoff) {
            out.exit_class = ClockedExit::Kind::Timeout;
            out.exit_point = {px, py};
            out.agmon_clock = std::max(tau, 0.0);
            out.euclid_time = sigma;
            return out;
        }
    }
}

} // namespace

double pairwise_sum(const std::vector<double>& x) {
    // bottom level: serial blocks of 64, then a fixed binary tree
    const std::size_t n = x.size();
    if (n == 0) return 0.0;
    std::vector<double> acc((n + 63) / 64, 0.0);
    for (std::size_t b = 0; b < acc.size(); ++b) {
        double s = 0.0;
        const std::size_t hi = std::min(n, (b + 1) * 64);
        for (std::size_t k = b * 64; k < hi; ++k) s += x[k];
        acc[b] = s;
    }
    for (std::size_t stride = 1; stride < acc.size(); stride *= 2)
        for (std::size_t k = 0; k + stride < acc.size(); k += 2 * stride)
            acc[k] += acc[k + stride];
    return acc[0];
}

namespace {

struct BatchResult {
    std::vector<double> discount;          // e^{-tau} for HitE, else 0
    std::vector<unsigned char> kind;
    long counts[4] = {0, 0, 0, 0};
};

template <bool Parallel>
BatchResult run_batch(const ScalarField& V, double lambda, const BubbleSet& domain,
                      Point start, long n_samples, const WalkParams& params,
                      std::uint64_t seed) {
    if (n_samples < 100)
        throw std::invalid_argument("monte carlo estimators need n_samples >= 100");
    BatchResult r;
    r.discount.assign(n_samples, 0.0);
    r.kind.assign(n_samples, 0);

#pragma omp parallel for schedule(static) if (Parallel)
    for (long long k = 0; k < (long long)n_samples; ++k) {
        PhiloxStream rng(seed, std::uint64_t(k));
        const ClockedExit e = simulate_exit(V, lambda, domain, start, params, rng);
        r.kind[k] = (unsigned char)e.exit_class;
        if (e.exit_class == ClockedExit::Kind::HitE)
            r.discount[k] = std::exp(-e.agmon_clock);
    }
    for (long k = 0; k < n_samples; ++k) ++r.counts[r.kind[k]];
    return r;
}

double domain_rate_floor(const ScalarField& V, double lambda, const BubbleSet& domain) {
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < V.values.size(); ++idx)
        if (domain.klass[idx] == BubbleSet::Class::Inside) vmin = std::min(vmin, V[idx]);
    return std::max(vmin - lambda, 0.0);
}

MeasureEstimate finish_discount(const BatchResult& r, const ScalarField& V, double lambda,
                                const BubbleSet& domain, const WalkParams& params,
                                std::uint64_t seed) {
    MeasureEstimate m;
    m.n_samples = long(r.discount.size());
    m.seed = seed;
    const double n = double(m.n_samples);
    const double sum = pairwise_sum(r.discount);
    std::vector<double> sq(r.discount.size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = r.discount[k] * r.discount[k];
    const double sum2 = pairwise_sum(sq);
    m.value = sum / n;
    const double var = std::max(sum2 / n - m.value * m.value, 0.0) * n / (n - 1.0);
    m.stderr_ = std::sqrt(var / n);
    m.n_hit_e = r.counts[0];
    m.n_hit_alpha = r.counts[1];
    m.n_hit_outer = r.counts[2];
    m.n_timeout = r.counts[3];
    m.timeout_fraction = double(m.n_timeout) / n;
    m.warning = m.timeout_fraction > 0.5;
    const double rate = domain_rate_floor(V, lambda, domain);
    m.dropped_ceiling = std::max(std::exp(-rate * params.t_max),
                                 std::isfinite(params.tau_cutoff)
                                     ? std::exp(-params.tau_cutoff)
                                     : 0.0);
    return m;
}

MeasureEstimate finish_measure(const BatchResult& r, std::uint64_t seed) {
    MeasureEstimate m;
    m.n_samples = long(r.discount.size());
    m.seed = seed;
    m.n_hit_e = r.counts[0];
    m.n_hit_alpha = r.counts[1];
    m.n_hit_outer = r.counts[2];
    m.n_timeout = r.counts[3];
    const double n = double(m.n_samples);
    m.value = double(m.n_hit_e) / n;
    m.stderr_ = std::sqrt(std::max(m.value * (1.0 - m.value), 0.0) / (n - 1.0));
    m.timeout_fraction = double(m.n_timeout) / n;
    m.warning = m.timeout_fraction > 0.5;
    return m;
}

} // namespace

MeasureEstimate expected_discount(const ScalarField& V, double lambda,
                                  const BubbleSet& domain, Point start, long n_samples,
                                  const WalkParams& params, std::uint64_t seed) {
    return finish_discount(run_batch<true>(V, lambda, domain, start, n_samples, params, seed),
                           V, lambda, domain, params, seed);
}

MeasureEstimate expected_discount_serial(const ScalarField& V, double lambda,
                                         const BubbleSet& domain, Point start,
                                         long n_samples, const WalkParams& params,
                                         std::uint64_t seed) {
    return finish_discount(run_batch<false>(V, lambda, domain, start, n_samples, params, seed),
                           V, lambda, domain, params, seed);
}

MeasureEstimate harmonic_measure_mc(const ScalarField& V, double lambda,
                                    const BubbleSet& domain, Point start, long n_samples,
                                    const WalkParams& params, std::uint64_t seed) {
    WalkParams p = params;
    p.tau_cutoff = std::numeric_limits<double>::infinity();   // need true exit classes
    return finish_measure(run_batch<true>(V, lambda, domain, start, n_samples, p, seed), seed);
}

MeasureEstimate harmonic_measure_mc_serial(const ScalarField& V, double lambda,
                                           const BubbleSet& domain, Point start,
                                           long n_samples, const WalkParams& params,
                                           std::uint64_t seed) {
    WalkParams p = params;
    p.tau_cutoff = std::numeric_limits<double>::infinity();
    return finish_measure(run_batch<false>(V, lambda, domain, start, n_samples, p, seed), seed);
}

namespace {

struct SorSetup {
    std::vector<std::uint8_t> solve;   // 1 where the node is an unknown
    ScalarField init;
    double omega;
};

SorSetup sor_setup(const BubbleSet& domain, const ScalarField* warm_start) {
    const Grid& g = domain.grid;
    SorSetup s;
    s.solve.assign(g.node_count(), 0);
    s.init = ScalarField(g, 0.0);
    std::size_t inside = 0;
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        if (domain.klass[idx] == BubbleSet::Class::Inside && !g.on_boundary(idx)) {
            s.solve[idx] = 1;
            ++inside;
            if (warm_start) s.init[idx] = warm_start->values[idx];
        } else if (domain.mask.allowed(idx)) {
            s.init[idx] = 1.0;   // pole on the allowed set: already arrived
        }
    }
    if (inside == 0)
        throw std::invalid_argument("harmonic_measure_pde: empty interior");
    s.omega = 2.0 / (1.0 + std::sin(M_PI / std::max(g.n[0], g.n[1])));
    return s;
}

double sor_residual(const ScalarField& u, const std::vector<std::uint8_t>& solve) {
    const Grid& g = u.grid;
    const double ax = 1.0 / (g.h[0] * g.h[0]);
    const double ay = g.dim == 2 ? 1.0 / (g.h[1] * g.h[1]) : 0.0;
    const double wsum = 2.0 * (ax + ay);
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (long long idx = 0; idx < (long long)g.node_count(); ++idx) {
        if (!solve[idx]) continue;
        const int i = g.ix(idx), j = g.iy(idx);
        double s = ax * (u.at(i - 1, j) + u.at(i + 1, j));
        if (g.dim == 2) s += ay * (u.at(i, j - 1) + u.at(i, j + 1));
        worst = std::max(worst, std::fabs(s / wsum - u[idx]));
    }
    return worst;
}

template <bool RedBlack>
ScalarField sor_solve(const BubbleSet& domain, double tol, int max_sweeps,
                      const ScalarField* warm_start) {
    SorSetup s = sor_setup(domain, warm_start);
    const Grid& g = domain.grid;
    ScalarField u = s.init;
    const double ax = 1.0 / (g.h[0] * g.h[0]);
    const double ay = g.dim == 2 ? 1.0 / (g.h[1] * g.h[1]) : 0.0;
    const double wsum = 2.0 * (ax + ay);
    const int ny = g.n[1];

    auto relax = [&](int i, int j) {
        const std::size_t idx = g.index(i, j);
        if (!s.solve[idx]) return;
        double avg = ax * (u.at(i - 1, j) + u.at(i + 1, j));
        if (g.dim == 2) avg += ay * (u.at(i, j - 1) + u.at(i, j + 1));
        u[idx] += s.omega * (avg / wsum - u[idx]);
    };

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        if constexpr (RedBlack) {
            for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
                for (int j = 0; j < ny; ++j)
                    for (int i = (j + color) & 1; i < g.n[0]; i += 2) relax(i, j);
            }
        } else {
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < g.n[0]; ++i) relax(i, j);
        }
        if (sweep % 32 == 0 || sweep == max_sweeps) {
            if (sor_residual(u, s.solve) <= tol) return u;
        }
    }
    throw std::runtime_error("harmonic_measure_pde: SOR did not converge");
}

} // namespace

ScalarField harmonic_measure_pde(const BubbleSet& domain, double tol, int max_sweeps,
                                 const ScalarField* warm_start) {
    return sor_solve<true>(domain, tol, max_sweeps, warm_start);
}

ScalarField harmonic_measure_pde_serial(const BubbleSet& domain, double tol, int max_sweeps,
                                        const ScalarField* warm_start) {
    return sor_solve<false>(domain, tol, max_sweeps, warm_start);
}

TimeChangeReport time_change_equivalence(const ScalarField& V, double lambda,
                                         const BubbleSet& domain, Point start,
                                         long n_samples, const WalkParams& params,
                                         std::uint64_t seed) {
    TimeChangeReport rep;
    WalkParams uniform = params;
    uniform.time_changed = false;
    WalkParams rescaled = params;
    rescaled.time_changed = true;
    rep.uniform_clock =
        harmonic_measure_mc(V, lambda, domain, start, n_samples, uniform, seed);
    rep.rescaled_clock = harmonic_measure_mc(V, lambda, domain, start, n_samples, rescaled,
                                             seed ^ 0xA5A5A5A5DEADBEEFull);
    const double se = std::hypot(rep.uniform_clock.stderr_, rep.rescaled_clock.stderr_);
    rep.z = se > 0.0 ? (rep.uniform_clock.value - rep.rescaled_clock.value) / se : 0.0;
    rep.agree = std::fabs(rep.uniform_clock.value - rep.rescaled_clock.value) <= 3.0 * se;
    return rep;
}

} // namespace agmonlab
