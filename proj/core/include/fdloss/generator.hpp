#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fdloss/matrix.hpp"

namespace fdloss {

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out

  bool operator==(const DenseLayer&) const = default;
};

// Feed-forward generator: tanh on hidden layers, identity on the output layer.
class GeneratorModel {
 public:
  GeneratorModel() = default;
  explicit GeneratorModel(std::vector<DenseLayer> layers);

  // layer_dims = [z_dim, h_1, ..., out_dim]; weights normal(0, 1/sqrt(fan_in)) from
  // SplitMix64(seed), biases zero.
  static GeneratorModel initialized(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<std::size_t> layer_dims() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const noexcept;

  // Flattened parameters in declaration order: per layer, weight row-major then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  bool operator==(const GeneratorModel&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

// Same shapes as the model's layers.
using GeneratorGradients = std::vector<DenseLayer>;

std::vector<double> flatten(const GeneratorGradients& grads);

Matrix generate(const GeneratorModel& model, const Matrix& z);

// Reverse-mode gradient of sum(sample_grads ⊙ generate(model, z)) with respect to every
// parameter.
GeneratorGradients generator_backprop(const GeneratorModel& model, const Matrix& z,
                                      const Matrix& sample_grads);

}  // namespace fdloss
