#pragma once

#include <optional>

#include "fdloss/computation_log.hpp"
#include "fdloss/matrix.hpp"

namespace fdloss {

// Mean and population covariance (divisor n) of a feature population. `weight` is the
// effective sample count, or the EMA mass for moving-average estimates.
struct GaussianStats {
  Vector mu;
  Matrix sigma;
  double weight = 0.0;

  std::size_t dim() const noexcept { return mu.size(); }
};

// Checks shapes, finiteness, symmetry, and the PSD tolerance
// (min eigenvalue >= -1e-8 * trace(sigma) / dim). Throws Error on violation.
void validate_stats(const GaussianStats& stats);

// Column mean and population covariance of an n x d feature matrix.
GaussianStats stats_from_features(const Matrix& features);

// Reference-side statistics with the cached covariance square root. Immutable once built.
class ReferenceStats {
 public:
  explicit ReferenceStats(GaussianStats stats, ComputationLog* log = nullptr);

  const GaussianStats& stats() const noexcept { return stats_; }
  const Matrix& sigma_root() const noexcept { return sigma_root_; }
  std::size_t dim() const noexcept { return stats_.dim(); }
  double sigma_trace() const noexcept { return sigma_trace_; }

 private:
  GaussianStats stats_;
  Matrix sigma_root_;
  double sigma_trace_;
};

// ||mu_r - mu_g||^2 + Tr(S_r) + Tr(S_g) - 2 Tr((S_r^{1/2} S_g S_r^{1/2})^{1/2}), unfloored.
double fd_raw(const ReferenceStats& ref, const GaussianStats& gen, ComputationLog* log = nullptr);

// fd_raw floored at zero. A negative raw value is recorded in `log`.
double fd(const ReferenceStats& ref, const GaussianStats& gen, ComputationLog* log = nullptr);

struct FdGradient {
  Vector d_mu;
  Matrix d_sigma;
  // Set when an eigenvalue of S_r^{1/2} S_g S_r^{1/2} was raised to the floor before inversion.
  bool degenerate = false;
};

// Closed-form gradient of fd_raw with respect to the generated statistics:
//   d_mu    = 2 (mu_g - mu_r)
//   d_sigma = I - R C^{-1/2} R,  R = S_r^{1/2},  C = R S_g R
// Eigenvalues of C are floored at `eps_grad` before inversion; the default floor is
// 1e-10 * Tr(S_r) / d.
FdGradient fd_grad_stats(const ReferenceStats& ref, const GaussianStats& gen,
                         std::optional<double> eps_grad = std::nullopt);

}  // namespace fdloss
