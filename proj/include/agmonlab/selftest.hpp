#ifndef AGMONLAB_SELFTEST_HPP
#define AGMONLAB_SELFTEST_HPP

#include <string>
#include <vector>

namespace agmonlab {

/** One oracle comparison: a closed form against an independent quadrature
 * (or algebraic identity), with the worst relative error seen. */
struct CheckResult {
    std::string name;
    bool ok = false;
    double err = 0.0;
    double tol = 0.0;
};

/** The full closed-form cross-check suite. Every entry must pass for the
 * special-function layer to be trusted as an oracle elsewhere. */
std::vector<CheckResult> closed_form_selftest();

} // namespace agmonlab

#endif
