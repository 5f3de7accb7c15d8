#ifndef AGMONLAB_EIGENSOLVER_HPP
#define AGMONLAB_EIGENSOLVER_HPP

#include "agmonlab/field_core.hpp"

namespace agmonlab {

/** Ground-state pair of the discrete operator -1/2 Lap + V with Dirichlet
 * walls on the computational box. Sup-norm one, sign fixed positive. */
struct EigenPair {
    double lambda = 0.0;
    ScalarField u;
    double residual = 0.0;
    int iterations = 0;
};

/** (-1/2 Lap + V) v with homogeneous Dirichlet data: boundary entries of the
 * input are read as zero and boundary entries of the output are zero. */
ScalarField apply_hamiltonian(const ScalarField& V, const ScalarField& v);
ScalarField apply_hamiltonian_serial(const ScalarField& V, const ScalarField& v);

/** <v, Hv> / <v, v> under the node-wise inner product. */
double rayleigh_quotient(const ScalarField& V, const ScalarField& v);

/** Smallest eigenpair by inverse iteration (shift 0, Jacobi-preconditioned
 * conjugate-gradient inner solves, all-ones start vector). Deterministic.
 * Throws on non-convergence, carrying the last residual in the message. */
EigenPair ground_state(const ScalarField& V, double tol = 1e-7, int max_iter = 80);

/** Boundary-value solve of the same equation at a fixed energy: unknowns on
 * forbidden nodes, u = boundary_value on allowed nodes, u = 0 on the box.
 * This is how the fixed-lambda scenarios obtain their state. */
ScalarField pinned_state(const ScalarField& V, double lambda, const RegionMask& mask,
                         double boundary_value = 1.0, double tol = 1e-11,
                         int max_iter = 200000);

/** Dot product with a fixed blockwise reduction tree: the result does not
 * depend on the number of OpenMP threads. */
double deterministic_dot(const std::vector<double>& a, const std::vector<double>& b);

} // namespace agmonlab

#endif
