#ifndef AGMONLAB_QUADRATURE_HPP
#define AGMONLAB_QUADRATURE_HPP

#include <cmath>

namespace agmonlab {

/** Adaptive Simpson quadrature.
 *
 * Generic oracle used to cross-check the closed-form expressions; it only
 * touches the integrand, never the formulas under test. */
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 52) {
    struct Impl {
        const F& f;
        int max_depth;
        double run(double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth >= max_depth || std::fabs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            return run(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
                   run(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
        }
    };
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Impl{f, max_depth}.run(a, fa, b, fb, m, fm, whole, tol, 0);
}

} // namespace agmonlab

#endif
