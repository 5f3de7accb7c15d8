#include "agmonlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agmonlab {

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
    std::vector<double> out(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int k = 0; k < n; ++k)
        out[k] = std::exp(llo + (lhi - llo) * k / (n - 1));
    return out;
}

PdeMeasureBackend::PdeMeasureBackend(const DistanceField& dist, double tol)
    : dist_(dist), tol_(tol) {}

MeasureEstimate PdeMeasureBackend::omega(Point x, double alpha) {
    auto it = cache_.find(alpha);
    if (it == cache_.end()) {
        const BubbleSet b = bubble(dist_, alpha);
        // warm start from the largest cached level below alpha
        const ScalarField* warm = nullptr;
        auto lower = cache_.lower_bound(alpha);
        if (lower != cache_.begin()) {
            --lower;
            warm = &lower->second;
        }
        it = cache_.emplace(alpha, harmonic_measure_pde(b, tol_, 400000, warm)).first;
    }
    MeasureEstimate m;
    m.value = std::clamp(it->second[dist_.rho.grid.nearest(x)], 0.0, 1.0);
    m.stderr_ = 0.0;
    m.n_samples = 0;
    return m;
}

McMeasureBackend::McMeasureBackend(const ScalarField& V, double lambda,
                                   const DistanceField& dist, long n_samples,
                                   WalkParams params, std::uint64_t seed)
    : V_(V), lambda_(lambda), dist_(dist), n_samples_(n_samples), params_(params),
      seed_(seed) {}

MeasureEstimate McMeasureBackend::omega(Point x, double alpha) {
    const std::size_t node = dist_.rho.grid.nearest(x);
    const auto key = std::make_tuple(node, alpha, seed_);
    auto hit = cache_.find(key);
    if (hit != cache_.end()) return hit->second;
    auto bit = bubbles_.find(alpha);
    if (bit == bubbles_.end()) bit = bubbles_.emplace(alpha, bubble(dist_, alpha)).first;
    const MeasureEstimate m =
        harmonic_measure_mc(V_, lambda_, bit->second, x, n_samples_, params_, seed_);
    cache_.emplace(key, m);
    return m;
}

PointwiseBoundField agmon_pointwise_bound(const DistanceField& dist, double boundary_sup,
                                          const DistanceLaplacian& dlap) {
    if (!(boundary_sup > 0.0))
        throw std::invalid_argument("agmon_pointwise_bound: boundary_sup must be positive");
    PointwiseBoundField out;
    out.bound = ScalarField(dist.rho.grid);
    out.valid.assign(dist.rho.values.size(), 0);
    for (std::size_t idx = 0; idx < dist.rho.values.size(); ++idx) {
        const double r = dist.rho[idx];
        out.bound[idx] = r < kUnreached ? boundary_sup * std::exp(-r) : 0.0;
        out.valid[idx] = dlap.certified[idx] && dlap.nonneg[idx];
    }
    return out;
}

BubbleBound bubble_bound(Point x, const DistanceField& dist, MeasureBackend& omega,
                         const BoundConfig& cfg, double sup_norm) {
    const double rho_x = dist.at_point(x);
    BubbleBound best;
    best.value = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double alpha : cfg.alpha_grid) {
        if (!(alpha > rho_x)) continue;   // bubble must admit the pole
        const MeasureEstimate m = omega.omega(x, alpha);
        const double val = cfg.c_eps * std::exp(-(1.0 - cfg.eps) * alpha) +
                           m.value * sup_norm;
        if (val < best.value) {
            best.value = val;
            best.alpha_star = alpha;
            best.omega_star = m.value;
            best.omega_stderr = m.stderr_;
        }
        any = true;
    }
    if (!any)
        throw std::invalid_argument("bubble_bound: no admissible alpha above rho(x)");
    return best;
}

double discount_bound(const MeasureEstimate& discount, double boundary_sup) {
    // the discount never exceeds one, so the bound is capped at boundary_sup
    const double safe =
        discount.value + 3.0 * discount.stderr_ + discount.dropped_ceiling;
    return boundary_sup * std::min(safe, 1.0);
}

TubeReport tube_check(const std::vector<Point>& pts, const ScalarField& u, double sup_norm,
                      const ScalarField& omega_full, const DistanceField& rho_delta,
                      const BoundConfig& cfg, double stat_slack) {
    TubeReport rep;
    rep.best_fit_c = std::numeric_limits<double>::infinity();
    for (const Point& p : pts) {
        TubePoint tp;
        tp.x = p;
        tp.u_abs = std::fabs(bilinear_sample(u, p));
        const double rho = rho_delta.at_point(p);
        tp.sqrt_decay = std::sqrt(std::exp(-rho));
        tp.omega = std::clamp(omega_full[omega_full.grid.nearest(p)], 0.0, 1.0);
        tp.sharp = tp.u_abs >= cfg.sharp_factor * std::exp(-rho);
        if (tp.sharp) {
            rep.best_fit_c = std::min(rep.best_fit_c, tp.omega / tp.sqrt_decay);
            if (tp.omega < cfg.tube_floor * tp.sqrt_decay) rep.consistent = false;
        }
        if (tp.omega < 0.1 * tp.u_abs / sup_norm - stat_slack) rep.trivial_ok = false;
        rep.points.push_back(tp);
    }
    return rep;
}

namespace {

double local_gradient_scale(const ScalarField& u, std::size_t idx) {
    const Grid& g = u.grid;
    const int i = g.ix(idx), j = g.iy(idx);
    const int il = std::max(i - 1, 0), ir = std::min(i + 1, g.n[0] - 1);
    double gx = (u.at(ir, j) - u.at(il, j)) / ((ir - il) * g.h[0]);
    double gy = 0.0;
    if (g.dim == 2) {
        const int jl = std::max(j - 1, 0), jr = std::min(j + 1, g.n[1] - 1);
        gy = (u.at(i, jr) - u.at(i, jl)) / ((jr - jl) * g.h[1]);
    }
    return std::hypot(gx, gy);
}

[[noreturn]] void soundness_failure(const char* which, Point p, double bound, double u_abs,
                                    double slack) {
    std::ostringstream os;
    os << "bound_report: " << which << " bound violated at (" << p.x << ", " << p.y
       << "): bound=" << bound << " |u|=" << u_abs << " slack=" << slack;
    throw std::runtime_error(os.str());
}

} // namespace

std::vector<BoundReport> bound_report(const BoundReportInputs& in,
                                      const std::vector<Point>& pts) {
    const ScenarioArtifacts& art = in.art;
    const Grid& g = art.scenario.grid;
    const double h = g.min_h();
    const PointwiseBoundField pw =
        agmon_pointwise_bound(art.dist, std::max(art.boundary_sup, 1e-300), in.dlap);

    const BubbleSet whole = bubble(art.dist, std::numeric_limits<double>::infinity());

    std::vector<BoundReport> out;
    out.reserve(pts.size());
    for (const Point& p : pts) {
        const std::size_t node = g.nearest(p);
        BoundReport r;
        r.point = p;
        r.u_abs = std::fabs(bilinear_sample(art.u, p));
        r.rho = art.dist.rho[node];
        r.agmon_bound = pw.bound[node];
        r.drho_flag = pw.valid[node] != 0;

        const BubbleBound bb = bubble_bound(p, art.dist, in.omega_backend, in.cfg, 1.0);
        r.thm1_value = bb.value;
        r.alpha_star = bb.alpha_star;
        r.omega_star = bb.omega_star;

        WalkParams wp = in.walk;
        wp.tau_cutoff = 60.0;
        const MeasureEstimate disc =
            expected_discount(art.V, art.lambda, whole, p, in.discount_samples, wp, in.seed);
        r.fk_value = art.boundary_sup * disc.value;
        r.fk_stderr = art.boundary_sup * disc.stderr_;

        r.tube_lhs = std::clamp(in.omega_full[node], 0.0, 1.0);
        r.tube_rhs = std::sqrt(std::exp(-r.rho));
        r.trivial_lhs = 0.1 * r.u_abs / std::max(art.sup_norm, 1e-300);

        const double grad = local_gradient_scale(art.u, node);
        r.slack = 5.0 * h * grad;

        if (r.drho_flag && r.agmon_bound < r.u_abs - r.slack)
            soundness_failure("pointwise", p, r.agmon_bound, r.u_abs, r.slack);
        const double thm1_slack = r.slack + 3.0 * bb.omega_stderr;
        if (r.thm1_value < r.u_abs - thm1_slack)
            soundness_failure("bubble", p, r.thm1_value, r.u_abs, thm1_slack);
        const double fk_bound = discount_bound(disc, art.boundary_sup);
        if (fk_bound < r.u_abs - r.slack)
            soundness_failure("discount", p, fk_bound, r.u_abs, r.slack);

        out.push_back(r);
    }
    return out;
}

} // namespace agmonlab
