#include "agmonlab/selftest.hpp"

#include "agmonlab/closed_forms.hpp"
#include "agmonlab/quadrature.hpp"

#include <cmath>

namespace agmonlab {

namespace {

// int_0^inf psi(t) dt after t = s^2 and s = v/(1-v): smooth on [0,1]
double passage_mass_quadrature(double rho) {
    auto g = [rho](double v) {
        if (v <= 1e-8) return 0.0;
        const double w = rho * (1.0 - v) / (2.0 * v);
        return rho / std::sqrt(M_PI) * std::exp(-w * w) / (v * v);
    };
    return adaptive_simpson(g, 0.0, 1.0, 1e-13);
}

// int_0^inf e^{-t} psi(t) dt after t = s^2: decays like e^{-s^2}
double discounted_mass_quadrature(double rho) {
    auto g = [rho](double s) {
        if (s <= 1e-8) return 0.0;
        const double w = rho / (2.0 * s);
        return rho / std::sqrt(M_PI) * std::exp(-s * s - w * w) / (s * s);
    };
    return adaptive_simpson(g, 0.0, 14.0, 1e-13);
}

double truncated_quadrature(double rho, double T, bool discounted) {
    auto f = [rho, discounted](double t) {
        if (t <= 1e-300) return 0.0;
        const double base = rho / std::sqrt(4.0 * M_PI * t * t * t) *
                            std::exp(-rho * rho / (4.0 * t));
        return discounted ? std::exp(-t) * base : base;
    };
    return adaptive_simpson(f, 0.0, T, 1e-14);
}

double erfc_quadrature(double x) {
    auto f = [](double t) { return std::exp(-t * t); };
    if (x >= 0.0)
        return 2.0 / std::sqrt(M_PI) * adaptive_simpson(f, x, x + 13.0, 1e-14);
    return 2.0 - 2.0 / std::sqrt(M_PI) * adaptive_simpson(f, -x, -x + 13.0, 1e-14);
}

// modified Bessel equation residual via five-point stencils
double bessel_ode_residual(double nu, double z) {
    const double d = 1e-3;
    auto w = [nu](double x) { return bessel_k_half(nu, x); };
    const double w0 = w(z);
    const double w1 = (-w(z + 2 * d) + 8 * w(z + d) - 8 * w(z - d) + w(z - 2 * d)) / (12 * d);
    const double w2 =
        (-w(z + 2 * d) + 16 * w(z + d) - 30 * w0 + 16 * w(z - d) - w(z - 2 * d)) /
        (12 * d * d);
    const double res = z * z * w2 + z * w1 - (z * z + nu * nu) * w0;
    return std::fabs(res) / std::max(1.0, std::fabs(z * z * w0));
}

struct Suite {
    std::vector<CheckResult> results;
    void add(const std::string& name, double err, double tol) {
        results.push_back({name, err <= tol, err, tol});
    }
};

} // namespace

std::vector<CheckResult> closed_form_selftest() {
    Suite s;
    const double rhos[] = {0.5, 1.0, 2.0};

    double worst = 0.0;
    for (double rho : rhos)
        worst = std::max(worst, std::fabs(passage_mass_quadrature(rho) - 1.0));
    s.add("passage density normalizes to 1", worst, 1e-8);

    worst = 0.0;
    for (double rho : rhos) {
        const double q = discounted_mass_quadrature(rho);
        worst = std::max(worst, std::fabs(q - std::exp(-rho)) / std::exp(-rho));
    }
    s.add("discounted passage mass equals e^{-rho}", worst, 1e-8);

    const PassageParams grid[] = {{1.0, 0.5}, {2.0, 1.0}, {0.5, 2.0}, {1.0, 5.0}, {3.0, 0.7}};
    worst = 0.0;
    for (const auto& p : grid) {
        const double q = truncated_quadrature(p.rho, p.T, true);
        worst = std::max(worst, std::fabs(discounted_passage(p) - q) / std::max(q, 1e-300));
    }
    s.add("discounted_passage matches quadrature", worst, 1e-8);

    worst = 0.0;
    for (const auto& p : grid) {
        const double q = truncated_quadrature(p.rho, p.T, false);
        worst = std::max(worst, std::fabs(truncated_mass(p) - q) / std::max(q, 1e-300));
    }
    s.add("truncated_mass matches quadrature", worst, 1e-8);

    worst = 0.0;
    for (double x : {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 4.0, 6.0})
        worst = std::max(worst, std::fabs(erfc_cody(x) - erfc_quadrature(x)));
    s.add("erfc matches its defining integral", worst, 1e-12);

    worst = 0.0;
    for (double nu : {-0.5, 0.5, 1.5})
        for (double z : {0.5, 1.0, 2.0})
            worst = std::max(worst, bessel_ode_residual(nu, z));
    s.add("half-integer K solves the Bessel equation", worst, 1e-8);

    worst = 0.0;
    for (double x : {0.2, 0.7, 1.0, 2.5})
        for (double lam : {0.1, 0.5, 1.0, 3.0}) {
            const BrownianDiscount d = brownian_discount(x, lam);
            worst = std::max(worst,
                             std::fabs(d.via_bessel - d.closed_form) / d.closed_form);
        }
    s.add("Bessel and exponential discount forms agree", worst, 1e-12);

    worst = 0.0;
    for (double rho : rhos) {
        const double v = discounted_passage({rho, 50.0 * rho});
        worst = std::max(worst, std::fabs(v - std::exp(-rho)) / std::exp(-rho));
    }
    s.add("long-horizon discounted passage recovers e^{-rho}", worst, 1e-6);

    return s.results;
}

} // namespace agmonlab
