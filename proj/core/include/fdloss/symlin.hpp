#pragma once

#include "fdloss/computation_log.hpp"
#include "fdloss/matrix.hpp"

namespace fdloss {

// Eigenpairs of a symmetric matrix. `vectors` holds one unit eigenvector per column, in the
// order of `values` (ascending). Each eigenvector's first component with magnitude above
// 1e-12 is positive; exactly tied eigenvalues are ordered by lexicographic comparison of
// their eigenvectors.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

// Jacobi solver controls. The sweep loop stops once the off-diagonal Frobenius norm drops to
// `tolerance * ||A||_F`; `max_rotations_per_dim2 * d^2` rotations is the hard budget.
struct JacobiOptions {
  double tolerance = 1e-12;
  std::size_t max_rotations_per_dim2 = 100;
};

// Throws Error(kNonFinite) naming the first non-finite entry, Error(kAsymmetric) naming the
// first pair with |a_ij - a_ji| > 1e-10 * max(1, |a_ij|), and Error(kDimensionMismatch) for
// non-square or empty input.
void validate_symmetric(const Matrix& a);

// Cyclic Jacobi eigendecomposition. Throws NoConvergenceError carrying the remaining
// off-diagonal norm when the rotation budget is exhausted.
SymEigen eig_sym(const Matrix& a, const JacobiOptions& options = {});

// Eigenvalues only (ascending); skips eigenvector accumulation.
Vector eigvals_sym(const Matrix& a, const JacobiOptions& options = {});

// V diag(max(lambda, floor)) Vᵀ.
Matrix psd_project(const Matrix& a, double floor = 0.0);

// Symmetric PSD square root via eigendecomposition. Negative eigenvalues are clamped to zero;
// a warning is written to `log` when one is below -1e-8 * trace(a) / dim.
Matrix sqrt_psd(const Matrix& a, ComputationLog* log = nullptr);

// Tr((R C R)^{1/2}) computed as the sum of square roots of the clamped eigenvalues of the
// symmetric product R C R. With R = S^{1/2} for PSD S this equals Tr((S C)^{1/2}).
double trace_sqrt_product(const Matrix& ref_root, const Matrix& gen_cov,
                          ComputationLog* log = nullptr);

}  // namespace fdloss
