#include "checks.hpp"

#include "oracles.hpp"

namespace fdloss::check {

GaussianStats random_stats(std::size_t d, SplitMix64& rng, double ridge) {
  return {oracle::random_vector(d, rng), oracle::random_psd(d, rng, ridge), 100.0};
}

double fd_grad(const ReferenceStats& ref, const GaussianStats& gen, double h) {
  const std::size_t d = gen.dim();
  const FdGradient g = fd_grad_stats(ref, gen);
  std::vector<double> analytic;
  std::vector<double> numeric;
  for (std::size_t i = 0; i < d; ++i) {
    GaussianStats up = gen;
    GaussianStats down = gen;
    up.mu[i] += h;
    down.mu[i] -= h;
    numeric.push_back((fd_raw(ref, up) - fd_raw(ref, down)) / (2 * h));
    analytic.push_back(g.d_mu[i]);
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      GaussianStats up = gen;
      GaussianStats down = gen;
      up.sigma(i, j) += h;
      down.sigma(i, j) -= h;
      if (i != j) {
        up.sigma(j, i) += h;
        down.sigma(j, i) -= h;
      }
      numeric.push_back((fd_raw(ref, up) - fd_raw(ref, down)) / (2 * h));
      analytic.push_back(i == j ? g.d_sigma(i, i) : 2.0 * g.d_sigma(i, j));
    }
  }
  return oracle::relative_error(analytic, numeric);
}

double estimator_backprop(const Estimator& est, const ReferenceStats& ref, const Matrix& batch,
                          double h) {
  const FdGradient g = fd_grad_stats(ref, est.stats_with_batch(batch));
  const Matrix analytic = est.backprop(batch, g.d_mu, g.d_sigma);
  const std::vector<double> flat(batch.data().begin(), batch.data().end());
  const auto numeric = oracle::central_differences(
      [&](const std::vector<double>& x) {
        return fd_raw(ref, est.stats_with_batch(Matrix(batch.rows(), batch.cols(), x)));
      },
      flat, h);
  return oracle::relative_error(analytic.data(), numeric);
}

double featurize_backprop(const RepresentationSpec& spec, const Matrix& x, const Matrix& upstream,
                          double h) {
  const Representation rep(spec);
  const Matrix analytic = rep.backprop(x, upstream);
  const std::vector<double> flat(x.data().begin(), x.data().end());
  const auto numeric = oracle::central_differences(
      [&](const std::vector<double>& v) {
        return dot(rep.featurize(Matrix(x.rows(), x.cols(), v)).data(), upstream.data());
      },
      flat, h);
  return oracle::relative_error(analytic.data(), numeric);
}

double generator_backprop(const GeneratorModel& model, const Matrix& z, const Matrix& upstream,
                          double h) {
  const auto analytic = flatten(fdloss::generator_backprop(model, z, upstream));
  GeneratorModel probe = model;
  const auto numeric = oracle::central_differences(
      [&](const std::vector<double>& p) {
        probe.set_parameters(p);
        return dot(generate(probe, z).data(), upstream.data());
      },
      model.parameters(), h);
  return oracle::relative_error(analytic, numeric);
}

double end_to_end(const GeneratorModel& model, const Matrix& z, const FdObjective& objective,
                  const std::vector<Estimator>& estimators, double h) {
  const StepEvaluation at = evaluate_step(model, z, objective, estimators);
  GeneratorModel probe = model;
  const auto numeric = oracle::central_differences(
      [&](const std::vector<double>& p) {
        probe.set_parameters(p);
        const Matrix samples = generate(probe, z);
        double total = 0.0;
        for (std::size_t i = 0; i < objective.reps.size(); ++i) {
          const Matrix f = objective.reps[i].featurize(samples);
          total += at.grad_scales[i] * fd_raw(objective.refs[i], estimators[i].stats_with_batch(f));
        }
        return total;
      },
      model.parameters(), h);
  return oracle::relative_error(at.param_grads, numeric);
}

GeneratorModel jittered_model(const std::vector<std::size_t>& dims, SplitMix64& rng,
                              double jitter) {
  GeneratorModel m = GeneratorModel::initialized(dims, rng.next());
  std::vector<double> p = m.parameters();
  for (double& v : p) v += rng.normal(0.0, jitter);
  m.set_parameters(p);
  return m;
}

Chain random_chain(SplitMix64& rng, EstimatorKind kind) {
  // Keep generated samples full rank: z_dim >= out and hidden width >= out.
  const std::size_t out = 1 + rng.next() % 3;
  const std::size_t z_dim = out + rng.next() % 2;
  const std::size_t b = 2 + rng.next() % 7;
  RepresentationEnsemble ens;
  ens.specs = {{RepresentationKind::kIdentity, 0, out, out, 1.0},
               {RepresentationKind::kTanhRandomFeatures, rng.next(), out, 1 + rng.next() % 4, 1.0},
               {RepresentationKind::kQuadratic, 0, out, quadratic_out_dim(out), 0.5}};
  ens.weights = {1.0, 0.7, 0.3};
  std::vector<std::size_t> dims{z_dim};
  if (rng.next() % 2 == 0) dims.push_back(out + rng.next() % 3);
  dims.push_back(out);
  Chain ch{jittered_model(dims, rng),
           FdObjective::build(ens, rng.normal_matrix(300, out, 1.5)),
           make_estimators({kind, 0.8, 8}, ens),
           {}};
  const Matrix warm = generate(ch.model, rng.normal_matrix(16, z_dim));
  for (std::size_t i = 0; i < ens.size(); ++i)
    ch.estimators[i].warm_start(ch.objective.reps[i].featurize(warm));
  ch.z = rng.normal_matrix(b, z_dim);
  return ch;
}

}  // namespace fdloss::check
