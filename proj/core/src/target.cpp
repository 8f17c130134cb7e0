#include "fdloss/target.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdloss/error.hpp"
#include "fdloss/formats.hpp"
#include "fdloss/rng.hpp"
#include "fdloss/symlin.hpp"

namespace fdloss {

std::size_t TargetSpec::dim() const {
  if (is_mixture()) return components.front().mean.size();
  throw Error(ErrorKind::kNotInitialized, "file target dim is known only after loading");
}

void TargetSpec::validate() const {
  if (!is_mixture()) {
    if (path.empty()) throw Error(ErrorKind::kConfig, "target needs mixture components or a path");
    return;
  }
  const std::size_t d = components.front().mean.size();
  if (d == 0) throw Error(ErrorKind::kConfig, "target component mean is empty");
  double total = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    const std::string tag = "target component " + std::to_string(k);
    if (c.mean.size() != d || c.cov.rows() != d || c.cov.cols() != d) {
      throw Error(ErrorKind::kDimensionMismatch, tag + ": inconsistent dims");
    }
    if (!(c.weight >= 0.0)) throw Error(ErrorKind::kConfig, tag + ": negative weight");
    validate_symmetric(c.cov);
    const Vector values = eigvals_sym(c.cov);
    if (values.front() < -1e-12 * std::max(1.0, std::abs(trace(c.cov)))) {
      throw Error(ErrorKind::kConfig, tag + ": covariance is not PSD");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::kConfig, "target mixture weights sum to " + std::to_string(total));
  }
}

TargetSampler::TargetSampler(const TargetSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.is_mixture()) {
    dim_ = spec_.dim();
    for (const auto& c : spec_.components) roots_.push_back(sqrt_psd(c.cov));
  } else {
    file_rows_ = read_features(spec_.path);
    dim_ = file_rows_.cols();
  }
}

Matrix TargetSampler::sample(std::size_t n, std::uint64_t seed) const {
  SplitMix64 rng(seed);
  Matrix out(n, dim_);
  if (!spec_.is_mixture()) {
    const std::size_t rows = file_rows_.rows();
    for (std::size_t r = 0; r < n; ++r) {
      const auto src = file_rows_.row(static_cast<std::size_t>(rng.uniform() * rows) % rows);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }
  Vector eps(dim_);
  for (std::size_t r = 0; r < n; ++r) {
    const double u = rng.uniform();
    std::size_t k = 0;
    double cumulative = spec_.components[0].weight;
    while (k + 1 < spec_.components.size() && u >= cumulative) {
      ++k;
      cumulative += spec_.components[k].weight;
    }
    for (double& e : eps) e = rng.normal();
    const Vector offset = matvec(roots_[k], eps);
    auto row = out.row(r);
    for (std::size_t j = 0; j < dim_; ++j) row[j] = spec_.components[k].mean[j] + offset[j];
  }
  return out;
}

Matrix TargetSampler::reference_samples() const {
  if (!spec_.is_mixture()) return file_rows_;
  return sample(spec_.reference_count, derive_seed(spec_.seed, 0x5EF));
}

}  // namespace fdloss
