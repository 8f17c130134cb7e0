#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdloss/matrix.hpp"

namespace fdloss {

struct GaussianComponent {
  Vector mean;
  Matrix cov;
  double weight = 1.0;
};

// Data distribution standing in for the real-image reference: either a Gaussian mixture
// sampled from `seed`, or a FeatureFile of samples at `path` (used when there are no
// components).
struct TargetSpec {
  std::vector<GaussianComponent> components;
  std::string path;
  std::uint64_t seed = 0;
  // Samples drawn once, offline, to build reference statistics (mixture targets only).
  std::size_t reference_count = 8192;

  bool is_mixture() const noexcept { return !components.empty(); }
  std::size_t dim() const;
  // Weights sum to 1 within 1e-12, covariances symmetric PSD, consistent dims.
  void validate() const;
};

class TargetSampler {
 public:
  explicit TargetSampler(const TargetSpec& spec);

  std::size_t dim() const noexcept { return dim_; }

  // n rows. Mixture: component by cumulative weight, then mean + cov^{1/2} eps.
  // File: rows drawn uniformly with replacement.
  Matrix sample(std::size_t n, std::uint64_t seed) const;

  // Mixture: reference_count samples from a stream derived from the target seed.
  // File: every row of the file.
  Matrix reference_samples() const;

 private:
  TargetSpec spec_;
  std::size_t dim_ = 0;
  std::vector<Matrix> roots_;
  Matrix file_rows_;
};

}  // namespace fdloss
