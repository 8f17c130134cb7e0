#pragma once

// Finite-difference checks of the analytic gradients, shared by the unit and acceptance tests.
// Each returns oracle::relative_error(analytic, numeric) for one instance.

#include "fdloss/estimators.hpp"
#include "fdloss/frechet.hpp"
#include "fdloss/generator.hpp"
#include "fdloss/representations.hpp"
#include "fdloss/rng.hpp"
#include "fdloss/trainer.hpp"

namespace fdloss::check {

GaussianStats random_stats(std::size_t d, SplitMix64& rng, double ridge = 0.05);

// d FD / d(mu_g, Sigma_g); covariance entries are perturbed as symmetric pairs.
double fd_grad(const ReferenceStats& ref, const GaussianStats& gen, double h = 1e-5);

// d FD(estimator stats with batch) / d batch.
double estimator_backprop(const Estimator& est, const ReferenceStats& ref, const Matrix& batch,
                          double h = 1e-5);

// d <featurize(x), upstream> / d x.
double featurize_backprop(const RepresentationSpec& spec, const Matrix& x, const Matrix& upstream,
                          double h = 1e-6);

// d <generate(z), upstream> / d parameters.
double generator_backprop(const GeneratorModel& model, const Matrix& z, const Matrix& upstream,
                          double h = 1e-5);

// Full chain noise -> generator -> representations -> estimators -> FD, estimators frozen.
// The numeric side differentiates sum_i grad_scale_i * FD_i(theta) with grad_scale_i held at
// its value at theta, matching the stop-gradient on the normalizer.
double end_to_end(const GeneratorModel& model, const Matrix& z, const FdObjective& objective,
                  const std::vector<Estimator>& estimators, double h = 1e-5);

// A random instance of the full chain: generator (z_dim >= out so samples stay full rank),
// identity + tanh_rf + quadratic ensemble with unequal weights, estimators warm-started from the
// generator's own samples, and a noise batch of 2..8 rows.
struct Chain {
  GeneratorModel model;
  FdObjective objective;
  std::vector<Estimator> estimators;
  Matrix z;
};
Chain random_chain(SplitMix64& rng, EstimatorKind kind);

// A generator with every parameter jittered away from its initialization.
GeneratorModel jittered_model(const std::vector<std::size_t>& dims, SplitMix64& rng,
                              double jitter = 0.3);

}  // namespace fdloss::check
