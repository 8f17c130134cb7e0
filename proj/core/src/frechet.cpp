#include "fdloss/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "fdloss/error.hpp"
#include "fdloss/symlin.hpp"

namespace fdloss {

namespace {

void require_matching(const ReferenceStats& ref, const GaussianStats& gen, const char* op) {
  if (gen.mu.size() != ref.dim() || gen.sigma.rows() != ref.dim() ||
      gen.sigma.cols() != ref.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(op) + ": reference dim " + std::to_string(ref.dim()) +
                    ", generated mean dim " + std::to_string(gen.mu.size()) +
                    ", generated covariance " + std::to_string(gen.sigma.rows()) + "x" +
                    std::to_string(gen.sigma.cols()));
  }
}

}  // namespace

void validate_stats(const GaussianStats& stats) {
  if (stats.mu.empty() || stats.sigma.rows() != stats.mu.size() ||
      stats.sigma.cols() != stats.mu.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "stats: mean and covariance shapes disagree");
  }
  for (std::size_t i = 0; i < stats.mu.size(); ++i) {
    if (!std::isfinite(stats.mu[i])) {
      throw Error(ErrorKind::kNonFinite, "stats: non-finite mean entry " + std::to_string(i));
    }
  }
  if (!(stats.weight >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "stats: negative weight");
  const Vector values = eigvals_sym(stats.sigma);
  const double limit = -1e-8 * std::abs(trace(stats.sigma)) / static_cast<double>(stats.dim());
  if (values.front() < limit) {
    std::ostringstream msg;
    msg << "stats: covariance has eigenvalue " << values.front() << " below " << limit;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
}

GaussianStats stats_from_features(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "stats_from_features: no rows");
  if (d == 0) throw Error(ErrorKind::kInvalidArgument, "stats_from_features: zero columns");
  for (std::size_t r = 0; r < n; ++r) {
    for (double v : features.row(r)) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kNonFinite,
                    "stats_from_features: non-finite entry in row " + std::to_string(r));
      }
    }
  }

  GaussianStats out{Vector(d, 0.0), Matrix(d, d), static_cast<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    auto row = features.row(r);
    for (std::size_t j = 0; j < d; ++j) out.mu[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& m : out.mu) m *= inv_n;

  Vector centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = features.row(r);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - out.mu[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) out.sigma(i, j) += centered[i] * centered[j];
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      out.sigma(i, j) *= inv_n;
      out.sigma(j, i) = out.sigma(i, j);
    }
  }
  return out;
}

ReferenceStats::ReferenceStats(GaussianStats stats, ComputationLog* log)
    : stats_(std::move(stats)) {
  validate_stats(stats_);
  stats_.sigma = symmetrized(stats_.sigma);
  sigma_root_ = sqrt_psd(stats_.sigma, log);
  sigma_trace_ = trace(stats_.sigma);
}

double fd_raw(const ReferenceStats& ref, const GaussianStats& gen, ComputationLog* log) {
  require_matching(ref, gen, "fd");
  const GaussianStats& r = ref.stats();
  return squared_distance(r.mu, gen.mu) + ref.sigma_trace() + trace(gen.sigma) -
         2.0 * trace_sqrt_product(ref.sigma_root(), gen.sigma, log);
}

double fd(const ReferenceStats& ref, const GaussianStats& gen, ComputationLog* log) {
  const double raw = fd_raw(ref, gen, log);
  if (raw < 0.0) {
    if (log != nullptr) {
      std::ostringstream msg;
      msg << "fd: raw value " << raw << " floored to 0";
      log->info(msg.str());
    }
    return 0.0;
  }
  return raw;
}

FdGradient fd_grad_stats(const ReferenceStats& ref, const GaussianStats& gen,
                         std::optional<double> eps_grad) {
  require_matching(ref, gen, "fd_grad_stats");
  const std::size_t d = ref.dim();
  const double eps = eps_grad.value_or(1e-10 * ref.sigma_trace() / static_cast<double>(d));

  FdGradient out{Vector(d), Matrix::identity(d), false};
  for (std::size_t i = 0; i < d; ++i) out.d_mu[i] = 2.0 * (gen.mu[i] - ref.stats().mu[i]);

  const Matrix& root = ref.sigma_root();
  const SymEigen ce = eig_sym(symmetrized(matmul(matmul(root, gen.sigma), root)));

  // C^{-1/2} with floored eigenvalues.
  Matrix inv_sqrt(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    double lam = ce.values[k];
    if (!(lam >= eps)) {
      lam = eps;
      out.degenerate = true;
    }
    const double scale = lam > 0.0 ? 1.0 / std::sqrt(lam) : 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double vik = scale * ce.vectors(i, k);
      for (std::size_t j = 0; j < d; ++j) inv_sqrt(i, j) += vik * ce.vectors(j, k);
    }
  }
  out.d_sigma -= symmetrized(matmul(matmul(root, inv_sqrt), root));
  return out;
}

}  // namespace fdloss
