#include "fdloss/generator.hpp"

#include <cmath>
#include <string>

#include "fdloss/error.hpp"
#include "fdloss/rng.hpp"

namespace fdloss {

namespace {

Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix y = matmul_transposed(x, layer.weight);
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t j = 0; j < y.cols(); ++j) y(r, j) += layer.bias[j];
  return y;
}

// Inputs to each layer; activations[0] = z, activations.back() = output.
std::vector<Matrix> forward_trace(const GeneratorModel& model, const Matrix& z) {
  if (z.cols() != model.input_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "generate: noise has " + std::to_string(z.cols()) + " columns, model expects " +
                    std::to_string(model.input_dim()));
  }
  const auto& layers = model.layers();
  std::vector<Matrix> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(z);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix y = affine(acts.back(), layers[l]);
    if (l + 1 < layers.size())
      for (double& v : y.data()) v = std::tanh(v);
    acts.push_back(std::move(y));
  }
  return acts;
}

}  // namespace

GeneratorModel::GeneratorModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorKind::kInvalidArgument, "generator needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0 ||
        layer.bias.size() != layer.weight.rows()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "generator layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "generator layer " + std::to_string(l) + " input does not chain");
    }
    for (double v : layer.weight.data())
      if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, "generator weight is not finite");
    for (double v : layer.bias)
      if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, "generator bias is not finite");
  }
}

GeneratorModel GeneratorModel::initialized(const std::vector<std::size_t>& layer_dims,
                                           std::uint64_t seed) {
  if (layer_dims.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "generator needs at least input and output dims");
  }
  SplitMix64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t in = layer_dims[l];
    const std::size_t out = layer_dims[l + 1];
    if (in == 0 || out == 0) throw Error(ErrorKind::kInvalidArgument, "generator dims must be positive");
    layers.push_back(
        {rng.normal_matrix(out, in, 1.0 / std::sqrt(static_cast<double>(in))), Vector(out, 0.0)});
  }
  return GeneratorModel(std::move(layers));
}

std::vector<std::size_t> GeneratorModel::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers_.empty()) return dims;
  dims.push_back(layers_.front().weight.cols());
  for (const auto& l : layers_) dims.push_back(l.weight.rows());
  return dims;
}

std::size_t GeneratorModel::input_dim() const {
  if (layers_.empty()) throw Error(ErrorKind::kNotInitialized, "empty generator");
  return layers_.front().weight.cols();
}

std::size_t GeneratorModel::output_dim() const {
  if (layers_.empty()) throw Error(ErrorKind::kNotInitialized, "empty generator");
  return layers_.back().weight.rows();
}

std::size_t GeneratorModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.data().size() + l.bias.size();
  return n;
}

std::vector<double> GeneratorModel::parameters() const { return flatten(layers_); }

void GeneratorModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "set_parameters: got " + std::to_string(flat.size()) + " values, model has " +
                    std::to_string(parameter_count()));
  }
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (double& v : l.weight.data()) v = flat[k++];
    for (double& v : l.bias) v = flat[k++];
  }
}

std::vector<double> flatten(const GeneratorGradients& grads) {
  std::vector<double> flat;
  for (const auto& l : grads) {
    flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

Matrix generate(const GeneratorModel& model, const Matrix& z) {
  return std::move(forward_trace(model, z).back());
}

GeneratorGradients generator_backprop(const GeneratorModel& model, const Matrix& z,
                                      const Matrix& sample_grads) {
  const std::vector<Matrix> acts = forward_trace(model, z);
  if (sample_grads.rows() != z.rows() || sample_grads.cols() != model.output_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "generator_backprop: sample gradients are " + std::to_string(sample_grads.rows()) +
                    "x" + std::to_string(sample_grads.cols()) + ", expected " +
                    std::to_string(z.rows()) + "x" + std::to_string(model.output_dim()));
  }
  const auto& layers = model.layers();
  GeneratorGradients grads(layers.size());
  Matrix delta = sample_grads;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix& input = acts[l];
    grads[l].weight = matmul(delta.transposed(), input);
    grads[l].bias.assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r)
      for (std::size_t j = 0; j < delta.cols(); ++j) grads[l].bias[j] += delta(r, j);
    if (l == 0) break;
    Matrix upstream = matmul(delta, layers[l].weight);
    // input = tanh(pre-activation) for every layer but the first
    for (std::size_t k = 0; k < upstream.data().size(); ++k) {
      const double h = input.data()[k];
      upstream.data()[k] *= 1.0 - h * h;
    }
    delta = std::move(upstream);
  }
  return grads;
}

}  // namespace fdloss
