#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agmonlab/closed_forms.hpp"
#include "agmonlab/quadrature.hpp"
#include "agmonlab/rng.hpp"
#include "agmonlab/selftest.hpp"

#include <cmath>

using namespace agmonlab;

TEST_CASE("erfc basics") {
    CHECK(erfc_cody(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    // frozen from the defining-integral quadrature (also the textbook value)
    CHECK(erfc_cody(1.0) == doctest::Approx(0.15729920705028513).epsilon(1e-12));
    // reflection
    for (double x : {0.1, 0.7, 1.3, 2.9, 5.0})
        CHECK(erfc_cody(-x) == doctest::Approx(2.0 - erfc_cody(x)).epsilon(1e-14));
    // libm as an extra independent reference
    double worst = 0.0;
    for (double x = -5.0; x <= 7.0; x += 0.0625)
        worst = std::max(worst, std::fabs(erfc_cody(x) - std::erfc(x)));
    CHECK(worst < 1e-13);
}

TEST_CASE("erfc leading-order tail") {
    // x * sqrt(pi) * e^{x^2} erfc(x) -> 1; at x = 6 the first correction is
    // 1/(2 x^2) ~ 1.4%, inside the 2% window
    const double x = 6.0;
    const double v = erfcx_cody(x) * std::sqrt(M_PI) * x;
    CHECK(std::fabs(v - 1.0) < 0.02);
}

TEST_CASE("erfcx is the scaled complement") {
    for (double x : {0.0, 0.3, 1.0, 3.7, 8.0, 15.0, 25.0})
        CHECK(erfcx_cody(x) ==
              doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-11));
}

TEST_CASE("half-integer Bessel K") {
    CHECK(bessel_k_half(-0.5, 1.0) ==
          doctest::Approx(std::sqrt(M_PI / 2.0) * std::exp(-1.0)).epsilon(1e-14));
    CHECK(bessel_k_half(-0.5, 1.0) == doctest::Approx(0.46106850444789448).epsilon(1e-12));
    for (double x : {0.2, 1.0, 3.5})
        CHECK(bessel_k_half(0.5, x) == doctest::Approx(bessel_k_half(-0.5, x)).epsilon(1e-15));
    CHECK_THROWS_AS(bessel_k_half(2.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_k_half(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("passage density point values and mass") {
    CHECK(passage_density(1.0, 1.0) ==
          doctest::Approx(std::exp(-0.25) / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
    CHECK(passage_density(1.0, 1.0) == doctest::Approx(0.21969564473386122).epsilon(1e-12));
    CHECK_THROWS_AS(passage_density(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(passage_density(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("discounted passage limits") {
    // early times carry no mass
    CHECK(discounted_passage({1.0, 1e-4}) < 1e-10);
    // monotone increasing in T, dominated by the undiscounted mass
    double prev = 0.0;
    for (double T : {0.1, 0.3, 0.7, 1.5, 3.0, 6.0, 12.0}) {
        const double v = discounted_passage({1.0, T});
        CHECK(v >= prev);
        CHECK(v <= truncated_mass({1.0, T}) + 1e-15);
        prev = v;
    }
}

TEST_CASE("exponent inequality behind the sharp horizon") {
    // rho^2/(4T) + T >= rho with equality at T = rho/2
    for (double rho : {0.25, 1.0, 2.0, 7.0}) {
        double lowest = 1e300;
        for (double T = 0.05; T <= 8.0; T += 0.01) {
            const double f = rho * rho / (4.0 * T) + T - rho;
            CHECK(f >= -1e-12);
            lowest = std::min(lowest, f);
        }
        const double at_half = rho * rho / (4.0 * (rho / 2.0)) + rho / 2.0 - rho;
        CHECK(std::fabs(at_half) <= 1e-12);
    }
}

TEST_CASE("truncated mass endpoints") {
    CHECK(std::fabs(truncated_mass({1.0, 1e8}) - 1.0) < 1e-3);
    CHECK(truncated_mass({2.0, 1.0}) == doctest::Approx(erfc_cody(1.0)).epsilon(1e-15));
}

TEST_CASE("leading-order inversion round trip") {
    // invert omega = erfc(a) through the tail asymptotic
    // a^2 + log(sqrt(pi) a) = log(1/omega), then T = rho^2/(4 a^2);
    // for omega <= 1e-3 the recovered horizon is within 5%
    for (double rho : {1.0, 2.0}) {
        for (double a : {2.4, 3.0, 4.0, 6.0}) {
            const double T = rho * rho / (4.0 * a * a);
            const double omega = truncated_mass({rho, T});
            if (omega > 1e-3) continue;
            const double target = std::log(1.0 / omega);
            double ar = std::sqrt(target);
            for (int it = 0; it < 60; ++it) {
                const double f = ar * ar + std::log(std::sqrt(M_PI) * ar) - target;
                ar -= f / (2.0 * ar + 1.0 / ar);
            }
            const double T_rec = rho * rho / (4.0 * ar * ar);
            CHECK(std::fabs(T_rec / T - 1.0) < 0.05);
        }
    }
}

TEST_CASE("diffusion discount identities") {
    const BrownianDiscount d = brownian_discount(1.0, 0.5);
    CHECK(d.closed_form == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(d.via_bessel == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));

    PhiloxStream rng(2024, 7);
    for (int k = 0; k < 20; ++k) {
        const double x = 0.05 + 3.0 * rng.uniform();
        const double lam = 0.05 + 2.0 * rng.uniform();
        const BrownianDiscount b = brownian_discount(x, lam);
        CHECK(std::fabs(b.via_bessel - b.closed_form) <= 1e-12 * b.closed_form);
    }

    // x -> 0: no distance to travel
    CHECK(brownian_discount(1e-9, 1.0).closed_form == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Bessel-process discount") {
    // order -1/2 collapses to the exponential
    for (double x : {0.3, 1.0, 2.2})
        CHECK(bessel_discount(-0.5, x).value == doctest::Approx(std::exp(-x)).epsilon(1e-13));

    // order 1/2 simplifies algebraically to 2 e^{-x} / x
    CHECK(bessel_discount(0.5, 1.0).value == doctest::Approx(2.0 / M_E).epsilon(1e-13));
    CHECK_FALSE(bessel_discount(0.5, 1.0).exceeds_unity);

    // the displayed identity is not a probability for all orders; the
    // flag records where it leaves (0, 1]
    CHECK(bessel_discount(0.5, 0.5).exceeds_unity);
    CHECK(bessel_discount(1.5, 1.0).exceeds_unity);

    // positive and monotone decreasing on a grid, for every order
    for (double nu : {-0.5, 0.5, 1.5}) {
        double prev = 1e300;
        for (double x = 0.2; x <= 5.0; x += 0.2) {
            const double v = bessel_discount(nu, x).value;
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
    }
    CHECK_THROWS_AS(bessel_discount(2.5, 1.0), std::invalid_argument);
}

TEST_CASE("closed-form oracle suite is green") {
    for (const CheckResult& r : closed_form_selftest()) {
        INFO(r.name, " err=", r.err, " tol=", r.tol);
        CHECK(r.ok);
    }
}
