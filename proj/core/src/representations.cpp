#include "fdloss/representations.hpp"

#include <cmath>

#include "fdloss/error.hpp"
#include "fdloss/rng.hpp"

namespace fdloss {

namespace {

void require_cols(const Matrix& m, std::size_t cols, const char* what) {
  if (m.cols() != cols) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(what) + " has " + std::to_string(m.cols()) + " columns, expected " +
                    std::to_string(cols));
  }
}

bool has_parameters(RepresentationKind kind) {
  return kind == RepresentationKind::kAffine || kind == RepresentationKind::kTanhRandomFeatures;
}

}  // namespace

const char* to_string(RepresentationKind kind) {
  switch (kind) {
    case RepresentationKind::kIdentity: return "identity";
    case RepresentationKind::kAffine: return "affine";
    case RepresentationKind::kTanhRandomFeatures: return "tanh_rf";
    case RepresentationKind::kQuadratic: return "quadratic";
  }
  return "unknown";
}

RepresentationKind representation_kind_from_string(const std::string& name) {
  if (name == "identity") return RepresentationKind::kIdentity;
  if (name == "affine") return RepresentationKind::kAffine;
  if (name == "tanh_rf") return RepresentationKind::kTanhRandomFeatures;
  if (name == "quadratic") return RepresentationKind::kQuadratic;
  throw Error(ErrorKind::kConfig, "unknown representation kind '" + name + "'");
}

std::size_t quadratic_out_dim(std::size_t in_dim) noexcept {
  return in_dim + in_dim * (in_dim + 1) / 2;
}

void RepresentationSpec::validate() const {
  if (in_dim == 0 || out_dim == 0) {
    throw Error(ErrorKind::kInvalidArgument, "representation dims must be positive");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorKind::kInvalidArgument, "representation scale must be positive");
  }
  if (kind == RepresentationKind::kIdentity && in_dim != out_dim) {
    throw Error(ErrorKind::kInvalidArgument, "identity representation requires in_dim == out_dim");
  }
  if (kind == RepresentationKind::kQuadratic && out_dim != quadratic_out_dim(in_dim)) {
    throw Error(ErrorKind::kInvalidArgument,
                "quadratic representation with in_dim " + std::to_string(in_dim) +
                    " requires out_dim " + std::to_string(quadratic_out_dim(in_dim)));
  }
}

Representation::Representation(RepresentationSpec spec) : spec_(spec) {
  spec_.validate();
  if (has_parameters(spec_.kind)) {
    SplitMix64 rng(spec_.seed);
    weight_ = rng.normal_matrix(spec_.out_dim, spec_.in_dim, spec_.scale);
    bias_.resize(spec_.out_dim);
    for (double& b : bias_) b = rng.normal(0.0, spec_.scale);
  }
}

Representation::Representation(RepresentationSpec spec, Matrix weight, Vector bias)
    : spec_(spec), weight_(std::move(weight)), bias_(std::move(bias)) {
  spec_.validate();
  if (!has_parameters(spec_.kind)) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(to_string(spec_.kind)) + " representation takes no parameters");
  }
  if (weight_.rows() != spec_.out_dim || weight_.cols() != spec_.in_dim ||
      bias_.size() != spec_.out_dim) {
    throw Error(ErrorKind::kDimensionMismatch, "representation parameters do not match spec dims");
  }
}

Matrix Representation::pre_activation(const Matrix& samples) const {
  Matrix z = matmul_transposed(samples, weight_);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t j = 0; j < z.cols(); ++j) z(r, j) += bias_[j];
  return z;
}

Matrix Representation::featurize(const Matrix& samples) const {
  require_cols(samples, spec_.in_dim, "featurize: samples");
  switch (spec_.kind) {
    case RepresentationKind::kIdentity:
      return samples;
    case RepresentationKind::kAffine:
      return pre_activation(samples);
    case RepresentationKind::kTanhRandomFeatures: {
      Matrix z = pre_activation(samples);
      for (double& v : z.data()) v = std::tanh(v);
      return z;
    }
    case RepresentationKind::kQuadratic: {
      const std::size_t n = spec_.in_dim;
      Matrix out(samples.rows(), spec_.out_dim);
      for (std::size_t r = 0; r < samples.rows(); ++r) {
        auto x = samples.row(r);
        auto f = out.row(r);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) f[k++] = x[i];
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j) f[k++] = x[i] * x[j];
      }
      return out;
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "featurize: unknown representation kind");
}

Matrix Representation::backprop(const Matrix& samples, const Matrix& feature_grads) const {
  require_cols(samples, spec_.in_dim, "featurize_backprop: samples");
  require_cols(feature_grads, spec_.out_dim, "featurize_backprop: feature gradients");
  if (samples.rows() != feature_grads.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "featurize_backprop: row counts differ");
  }
  switch (spec_.kind) {
    case RepresentationKind::kIdentity:
      return feature_grads;
    case RepresentationKind::kAffine:
      return matmul(feature_grads, weight_);
    case RepresentationKind::kTanhRandomFeatures: {
      Matrix local = pre_activation(samples);
      for (std::size_t k = 0; k < local.data().size(); ++k) {
        const double t = std::tanh(local.data()[k]);
        local.data()[k] = feature_grads.data()[k] * (1.0 - t * t);
      }
      return matmul(local, weight_);
    }
    case RepresentationKind::kQuadratic: {
      const std::size_t n = spec_.in_dim;
      Matrix out(samples.rows(), n);
      for (std::size_t r = 0; r < samples.rows(); ++r) {
        auto x = samples.row(r);
        auto g = feature_grads.row(r);
        auto dx = out.row(r);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) dx[i] += g[k++];
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i; j < n; ++j) {
            if (i == j) {
              dx[i] += 2.0 * g[k] * x[i];
            } else {
              dx[i] += g[k] * x[j];
              dx[j] += g[k] * x[i];
            }
            ++k;
          }
        }
      }
      return out;
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "featurize_backprop: unknown representation kind");
}

Matrix featurize(const RepresentationSpec& spec, const Matrix& samples) {
  return Representation(spec).featurize(samples);
}

Matrix featurize_backprop(const RepresentationSpec& spec, const Matrix& samples,
                          const Matrix& feature_grads) {
  return Representation(spec).backprop(samples, feature_grads);
}

NormalizedTerm normalized_term(double fd_value, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::kInvalidArgument, "normalization constant must be > 0");
  if (!(fd_value >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "normalized_term: FD must be non-negative");
  }
  const double denom = fd_value + c;
  return {fd_value / denom, 1.0 / denom};
}

std::string RepresentationEnsemble::name(std::size_t i) const {
  return std::string(to_string(specs.at(i).kind)) + "_" + std::to_string(i);
}

void RepresentationEnsemble::validate() const {
  if (specs.empty()) throw Error(ErrorKind::kInvalidArgument, "ensemble has no representations");
  if (!weights.empty() && weights.size() != specs.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "ensemble has " + std::to_string(specs.size()) + " representations but " +
                    std::to_string(weights.size()) + " weights");
  }
  for (double w : weights)
    if (!(w > 0.0)) throw Error(ErrorKind::kInvalidArgument, "ensemble weights must be > 0");
  if (!(c > 0.0)) throw Error(ErrorKind::kInvalidArgument, "normalization constant must be > 0");
  for (const auto& s : specs) s.validate();
}

EnsembleLoss ensemble_loss(const RepresentationEnsemble& ensemble,
                           const std::vector<double>& per_rep_fd) {
  if (per_rep_fd.size() != ensemble.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "ensemble_loss: " + std::to_string(per_rep_fd.size()) + " FD values for " +
                    std::to_string(ensemble.size()) + " representations");
  }
  EnsembleLoss out{0.0, std::vector<double>(per_rep_fd.size())};
  for (std::size_t i = 0; i < per_rep_fd.size(); ++i) {
    const NormalizedTerm t = normalized_term(per_rep_fd[i], ensemble.c);
    const double w = ensemble.weight(i);
    out.loss += w * t.value;
    out.grad_scales[i] = w * t.grad_scale;
  }
  return out;
}

}  // namespace fdloss
