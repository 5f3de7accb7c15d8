#include "agmonlab/closed_forms.hpp"

#include <cmath>
#include <stdexcept>

namespace agmonlab {

namespace {

// Rational coefficients of the classical three-regime erf/erfc fit
// (Cody's rational Chebyshev approximations; ~1e-16 relative).
constexpr double kA[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                          3.77485237685302021e+02, 3.20937758913846947e+03,
                          1.85777706184603153e-01};
constexpr double kB[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                          1.28261652607737228e+03, 2.84423683343917062e+03};
constexpr double kC[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                          6.61191906371416295e+01, 2.98635138197400131e+02,
                          8.81952221241769090e+02, 1.71204761263407058e+03,
                          2.05107837782607147e+03, 1.23033935479799725e+03,
                          2.15311535474403846e-08};
constexpr double kD[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                          5.37181101862009858e+02, 1.62138957456669019e+03,
                          3.29079923573345963e+03, 4.36261909014324716e+03,
                          3.43936767414372164e+03, 1.23033935480374942e+03};
constexpr double kP[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                          1.25781726111229246e-01, 1.60837851487422766e-02,
                          6.58749161529837803e-04, 1.63153871373020978e-02};
constexpr double kQ[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                          5.27905102951428412e-01, 6.05183413124413191e-02,
                          2.33520497626869185e-03};

constexpr double kInvSqrtPi = 5.6418958354775628695e-01;

// erf on |x| <= 0.46875
double erf_small(double x) {
    const double z = x * x;
    double num = kA[4] * z;
    double den = z;
    for (int i = 0; i < 3; ++i) {
        num = (num + kA[i]) * z;
        den = (den + kB[i]) * z;
    }
    return x * (num + kA[3]) / (den + kB[3]);
}

// exp(y^2) erfc(y) on 0.46875 < y <= 4
double erfcx_mid(double y) {
    double num = kC[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
        num = (num + kC[i]) * y;
        den = (den + kD[i]) * y;
    }
    return (num + kC[7]) / (den + kD[7]);
}

// exp(y^2) erfc(y) on y > 4
double erfcx_large(double y) {
    const double z = 1.0 / (y * y);
    double num = kP[5] * z;
    double den = z;
    for (int i = 0; i < 4; ++i) {
        num = (num + kP[i]) * z;
        den = (den + kQ[i]) * z;
    }
    double r = z * (num + kP[4]) / (den + kQ[4]);
    return (kInvSqrtPi - r) / y;
}

// exp(-y^2) with the split-argument trick that keeps erfcx * exp(-y^2)
// accurate to the last few ulps.
double exp_neg_square(double y) {
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    return std::exp(-ysq * ysq) * std::exp(-del);
}

double gamma_abs_half(double nu) {
    const double a = std::fabs(nu);
    if (a == 0.5) return std::sqrt(M_PI);
    if (a == 1.5) return 0.5 * std::sqrt(M_PI);
    throw std::invalid_argument("bessel_discount: unsupported order");
}

} // namespace

double erfcx_cody(double x) {
    const double y = std::fabs(x);
    double r;
    if (y <= 0.46875) {
        r = std::exp(y * y) * (1.0 - erf_small(y));
    } else if (y <= 4.0) {
        r = erfcx_mid(y);
    } else {
        r = erfcx_large(y);
    }
    if (x < 0.0) {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows for x < -26 or so,
        // which is far outside anything the passage formulas feed it.
        r = 2.0 * std::exp(y * y) - r;
    }
    return r;
}

double erfc_cody(double x) {
    const double y = std::fabs(x);
    double r;
    if (y <= 0.46875) {
        r = 1.0 - erf_small(y);
    } else {
        r = erfcx_cody(y) * exp_neg_square(y);
    }
    return x < 0.0 ? 2.0 - r : r;
}

double bessel_k_half(double nu, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("bessel_k_half: x must be positive");
    const double a = std::fabs(nu);
    const double base = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x);
    if (a == 0.5) return base;                  // K_{1/2} = K_{-1/2}
    if (nu == 1.5) return base * (1.0 + 1.0 / x);
    throw std::invalid_argument("bessel_k_half: unsupported order");
}

double passage_density(double t, double rho) {
    if (!(t > 0.0)) throw std::invalid_argument("passage_density: t must be positive");
    if (!(rho > 0.0)) throw std::invalid_argument("passage_density: rho must be positive");
    return rho / std::sqrt(4.0 * M_PI * t * t * t) * std::exp(-rho * rho / (4.0 * t));
}

double truncated_mass(const PassageParams& p) {
    if (!(p.rho >= 0.0) || !(p.T > 0.0))
        throw std::invalid_argument("truncated_mass: need rho >= 0, T > 0");
    return erfc_cody(p.rho / (2.0 * std::sqrt(p.T)));
}

double discounted_passage(const PassageParams& p) {
    if (!(p.rho >= 0.0) || !(p.T > 0.0))
        throw std::invalid_argument("discounted_passage: need rho >= 0, T > 0");
    const double a = p.rho / (2.0 * std::sqrt(p.T));
    const double b = std::sqrt(p.T);
    // With 2ab = rho, both terms share the exponent -(a^2 + b^2):
    //   e^{+-rho} erfc(a -+ b) = erfcx(a -+ b) e^{-(a^2+b^2)}  (argument >= 0)
    const double common = std::exp(-(a * a + b * b));
    const double term_plus = 0.5 * erfcx_cody(a + b) * common;
    double term_minus;
    if (a >= b) {
        term_minus = 0.5 * erfcx_cody(a - b) * common;
    } else {
        term_minus = 0.5 * std::exp(-p.rho) * erfc_cody(a - b);
    }
    return term_minus + term_plus;
}

BrownianDiscount brownian_discount(double x, double lam) {
    if (!(x > 0.0) || !(lam > 0.0))
        throw std::invalid_argument("brownian_discount: need x > 0, lam > 0");
    const double z = x * std::sqrt(2.0 * lam);
    BrownianDiscount d;
    d.via_bessel = std::sqrt(2.0) * std::sqrt(z) / std::sqrt(M_PI) * bessel_k_half(-0.5, z);
    d.closed_form = std::exp(-z);
    return d;
}

BesselDiscount bessel_discount(double nu, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("bessel_discount: x must be positive");
    const double g = gamma_abs_half(nu);
    BesselDiscount d;
    d.value = std::pow(2.0, nu + 1.0) / (g * std::pow(x, nu)) * bessel_k_half(nu, x);
    d.exceeds_unity = d.value > 1.0;
    return d;
}

} // namespace agmonlab
