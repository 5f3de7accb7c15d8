#ifndef AGMONLAB_CLOSED_FORMS_HPP
#define AGMONLAB_CLOSED_FORMS_HPP

#include <cstdint>

namespace agmonlab {

/** Complementary error function, rational Chebyshev approximation
 * (Cody-style three-regime fit, well below 1e-12 absolute error). */
double erfc_cody(double x);

/** Scaled complement exp(x^2) * erfc(x); the cancellation-safe building
 * block for the discounted passage integral at large start levels. */
double erfcx_cody(double x);

/** Modified Bessel function of the second kind at half-integer order.
 * Supported orders: -1/2, 1/2, 3/2 (closed forms). */
double bessel_k_half(double nu, double x);

struct PassageParams {
    double rho;   // start level of the unit-speed diffusion, >= 0
    double T;     // truncation time, > 0
};

/** First-passage density psi(t) of a diffusion started at level rho:
 * rho / sqrt(4 pi t^3) * exp(-rho^2 / (4 t)). */
double passage_density(double t, double rho);

/** Discounted passage mass on [0, T]:  int_0^T e^{-t} psi(t) dt,
 * evaluated through scaled erfc so the e^{+rho} term cannot overflow. */
double discounted_passage(const PassageParams& p);

/** Truncated passage mass  int_0^T psi(t) dt = erfc(rho / (2 sqrt(T))). */
double truncated_mass(const PassageParams& p);

/** Discount of the first hitting time of 0 for unit-speed diffusion from x,
 * computed both through the Bessel identity and through the exponential
 * closed form. The two must agree to round-off. */
struct BrownianDiscount {
    double via_bessel;
    double closed_form;
};
BrownianDiscount brownian_discount(double x, double lam);

/** Discount E[e^{-tau/2}] of the hitting time for the Bessel-type process,
 * 2^{nu+1} / (Gamma(|nu|) x^nu) * K_nu(x). The displayed identity can
 * evaluate above 1 for nu > -1/2 at small x; such values are flagged
 * rather than clamped. */
struct BesselDiscount {
    double value;
    bool exceeds_unity;
};
BesselDiscount bessel_discount(double nu, double x);

} // namespace agmonlab

#endif
