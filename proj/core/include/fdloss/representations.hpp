#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdloss/matrix.hpp"

namespace fdloss {

enum class RepresentationKind { kIdentity, kAffine, kTanhRandomFeatures, kQuadratic };

const char* to_string(RepresentationKind kind);
RepresentationKind representation_kind_from_string(const std::string& name);

// A fixed feature map. Parameters are a deterministic function of the spec fields:
// affine and tanh_rf draw W (out_dim x in_dim, row-major) and then b (out_dim) from
// SplitMix64(seed), every entry normal(0, scale).
struct RepresentationSpec {
  RepresentationKind kind = RepresentationKind::kIdentity;
  std::uint64_t seed = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  double scale = 1.0;

  // Throws Error(kInvalidArgument) if the dims are inconsistent with the kind.
  void validate() const;
};

// out_dim of the quadratic map: n + n(n+1)/2.
std::size_t quadratic_out_dim(std::size_t in_dim) noexcept;

class Representation {
 public:
  explicit Representation(RepresentationSpec spec);
  // Affine or tanh_rf with explicit parameters instead of the seeded draw.
  Representation(RepresentationSpec spec, Matrix weight, Vector bias);

  const RepresentationSpec& spec() const noexcept { return spec_; }
  const Matrix& weight() const noexcept { return weight_; }
  const Vector& bias() const noexcept { return bias_; }

  // B x in_dim -> B x out_dim.
  Matrix featurize(const Matrix& samples) const;

  // Vector-Jacobian product at `samples`: B x out_dim feature gradients -> B x in_dim.
  Matrix backprop(const Matrix& samples, const Matrix& feature_grads) const;

 private:
  Matrix pre_activation(const Matrix& samples) const;

  RepresentationSpec spec_;
  Matrix weight_;
  Vector bias_;
};

Matrix featurize(const RepresentationSpec& spec, const Matrix& samples);
Matrix featurize_backprop(const RepresentationSpec& spec, const Matrix& samples,
                          const Matrix& feature_grads);

struct NormalizedTerm {
  double value;
  double grad_scale;
};

// fd / (sg(fd) + c): the value is fd / (fd + c), and the gradient of the term is the raw FD
// gradient multiplied by grad_scale = 1 / (fd + c).
NormalizedTerm normalized_term(double fd_value, double c);

struct RepresentationEnsemble {
  std::vector<RepresentationSpec> specs;
  std::vector<double> weights;  // one per spec; empty means all 1
  double c = 0.01;

  std::size_t size() const noexcept { return specs.size(); }
  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights.at(i); }
  // Display name, e.g. "identity_0", "tanh_rf_1".
  std::string name(std::size_t i) const;
  void validate() const;
};

struct EnsembleLoss {
  double loss;
  std::vector<double> grad_scales;  // w_i / (fd_i + c)
};

EnsembleLoss ensemble_loss(const RepresentationEnsemble& ensemble,
                           const std::vector<double>& per_rep_fd);

}  // namespace fdloss
