#include "fdloss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fdloss/rng.hpp"

namespace fdloss {

namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

constexpr std::uint64_t kNoiseSalt = 1;
constexpr std::uint64_t kPretrainNoiseSalt = 11;
constexpr std::uint64_t kPretrainSourceSalt = 12;

}  // namespace

std::vector<std::size_t> TrainConfig::layer_dims() const {
  std::vector<std::size_t> dims{z_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out_dim);
  return dims;
}

std::size_t TrainConfig::effective_warm_start_count() const noexcept {
  if (warm_start_count != 0) return warm_start_count;
  const std::size_t floor = estimator.kind == EstimatorKind::kQueue ? estimator.capacity : 0;
  return std::max<std::size_t>(floor, 4096);
}

PretrainOptions TrainConfig::pretrain_options() const {
  return {pretrain_batch_size, pretrain_lr, seed, optimizer};
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorKind::kConfig, "batch_size must be >= 1");
  if (warmup_steps > total_steps) throw Error(ErrorKind::kConfig, "warmup_steps exceeds total_steps");
  if (!(peak_lr > 0.0)) throw Error(ErrorKind::kConfig, "peak_lr must be > 0");
  if (z_dim == 0 || out_dim == 0) throw Error(ErrorKind::kConfig, "generator dims must be positive");
  if (estimator.kind == EstimatorKind::kEma && !(estimator.beta >= 0.0 && estimator.beta < 1.0)) {
    throw Error(ErrorKind::kConfig, "estimator beta must lie in [0, 1)");
  }
  if (estimator.kind == EstimatorKind::kQueue) {
    if (estimator.capacity < batch_size) {
      throw Error(ErrorKind::kConfig, "queue capacity must be at least the batch size");
    }
    if (effective_warm_start_count() < estimator.capacity) {
      throw Error(ErrorKind::kConfig, "warm_start_count must be at least the queue capacity");
    }
  }
  ensemble.validate();
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (ensemble.specs[i].in_dim != out_dim) {
      throw Error(ErrorKind::kConfig, "representation " + std::to_string(i) +
                                          " in_dim does not match generator out_dim");
    }
  }
  target.validate();
}

FdObjective FdObjective::build(const RepresentationEnsemble& ensemble,
                               const Matrix& reference_samples) {
  ensemble.validate();
  FdObjective obj{ensemble, {}, {}};
  for (const auto& spec : ensemble.specs) {
    obj.reps.emplace_back(spec);
    obj.refs.emplace_back(stats_from_features(obj.reps.back().featurize(reference_samples)));
  }
  return obj;
}

std::vector<Estimator> make_estimators(const EstimatorConfig& config,
                                       const RepresentationEnsemble& ensemble) {
  std::vector<Estimator> out;
  for (const auto& spec : ensemble.specs) {
    if (config.kind == EstimatorKind::kQueue) {
      out.emplace_back(QueueState(config.capacity, spec.out_dim));
    } else {
      out.emplace_back(EmaState(config.beta, spec.out_dim));
    }
  }
  return out;
}

Matrix sample_noise(std::size_t rows, std::size_t z_dim, SplitMix64& rng) {
  return rng.normal_matrix(rows, z_dim);
}

StepEvaluation evaluate_step(const GeneratorModel& model, const Matrix& z,
                             const FdObjective& objective,
                             const std::vector<Estimator>& estimators) {
  const std::size_t k = objective.reps.size();
  if (estimators.size() != k) {
    throw Error(ErrorKind::kDimensionMismatch, "evaluate_step: one estimator per representation");
  }
  const Matrix samples = generate(model, z);

  StepEvaluation out;
  std::vector<GaussianStats> stats;
  for (std::size_t i = 0; i < k; ++i) {
    out.features.push_back(objective.reps[i].featurize(samples));
    stats.push_back(estimators[i].stats_with_batch(out.features.back()));
    out.fd.push_back(fd(objective.refs[i], stats.back()));
  }
  const EnsembleLoss loss = ensemble_loss(objective.ensemble, out.fd);
  out.loss = loss.loss;
  out.grad_scales = loss.grad_scales;

  Matrix sample_grads(samples.rows(), samples.cols());
  for (std::size_t i = 0; i < k; ++i) {
    FdGradient g = fd_grad_stats(objective.refs[i], stats[i]);
    out.degenerate = out.degenerate || g.degenerate;
    for (double& v : g.d_mu) v *= loss.grad_scales[i];
    g.d_sigma *= loss.grad_scales[i];
    const Matrix feature_grads = estimators[i].backprop(out.features[i], g.d_mu, g.d_sigma);
    sample_grads += objective.reps[i].backprop(samples, feature_grads);
  }
  out.param_grads = flatten(generator_backprop(model, z, sample_grads));
  return out;
}

TrainResult post_train(const TrainConfig& config, const GeneratorModel& base) {
  config.validate();
  if (base.input_dim() != config.z_dim || base.output_dim() != config.out_dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                "base generator dims do not match the config's z_dim/out_dim");
  }
  const TargetSampler target(config.target);
  if (target.dim() != config.out_dim) {
    throw Error(ErrorKind::kDimensionMismatch, "target dim does not match generator out_dim");
  }
  const FdObjective objective = FdObjective::build(config.ensemble, target.reference_samples());
  std::vector<Estimator> estimators = make_estimators(config.estimator, config.ensemble);

  TrainResult result{base, {}};
  for (std::size_t i = 0; i < config.ensemble.size(); ++i)
    result.log.rep_names.push_back(config.ensemble.name(i));

  SplitMix64 noise(derive_seed(config.seed, kNoiseSalt));
  {
    const Matrix z = sample_noise(config.effective_warm_start_count(), config.z_dim, noise);
    const Matrix samples = generate(base, z);
    MetricsRecord rec{"warmstart", 0, 0.0, 0.0, {}};
    for (std::size_t i = 0; i < estimators.size(); ++i) {
      estimators[i].warm_start(objective.reps[i].featurize(samples));
      rec.fd.push_back(fd(objective.refs[i], estimators[i].current_stats()));
    }
    rec.loss = ensemble_loss(config.ensemble, rec.fd).loss;
    result.log.records.push_back(std::move(rec));
  }

  const LrSchedule schedule = config.schedule();
  AdamWState opt;
  GeneratorModel& model = result.model;
  for (std::size_t step = 0; step < config.total_steps; ++step) {
    const double lr = lr_at(step, schedule);
    const Matrix z = sample_noise(config.batch_size, config.z_dim, noise);
    StepEvaluation eval;
    try {
      eval = evaluate_step(model, z, objective, estimators);
    } catch (const Error& e) {
      // Overflowed samples surface as non-finite statistics inside the FD kernels.
      if (e.kind() != ErrorKind::kNonFinite) throw;
      throw TrainingAborted("non-finite values at step " + std::to_string(step) + ": " + e.what(),
                            step, model);
    }
    if (!std::isfinite(eval.loss) || !all_finite(eval.param_grads)) {
      std::ostringstream msg;
      msg << "non-finite loss or gradient at step " << step;
      throw TrainingAborted(msg.str(), step, model);
    }
    std::vector<double> params = model.parameters();
    optimizer_step(opt, params, eval.param_grads, lr, config.optimizer);
    if (!all_finite(params)) {
      std::ostringstream msg;
      msg << "non-finite parameters after update at step " << step;
      throw TrainingAborted(msg.str(), step, model);
    }
    model.set_parameters(params);
    for (std::size_t i = 0; i < estimators.size(); ++i) estimators[i].commit(eval.features[i]);
    result.log.records.push_back({"train", step, lr, eval.loss, eval.fd});
  }
  return result;
}

TrainResult post_train(const TrainConfig& config) {
  return post_train(config, GeneratorModel::initialized(config.layer_dims(), config.seed));
}

GeneratorModel pretrain_regression(GeneratorModel model, const TargetSpec& source,
                                   std::size_t steps, const PretrainOptions& options) {
  if (steps == 0) return model;
  const std::size_t out_dim = model.output_dim();
  if (model.input_dim() < out_dim) {
    throw Error(ErrorKind::kInvalidArgument, "pretrain_regression needs z_dim >= out_dim");
  }
  if (options.batch_size == 0) throw Error(ErrorKind::kInvalidArgument, "pretrain batch size is 0");
  const TargetSampler sampler(source);
  if (sampler.dim() != out_dim) {
    throw Error(ErrorKind::kDimensionMismatch, "pretrain source dim does not match generator output");
  }

  SplitMix64 noise(derive_seed(options.seed, kPretrainNoiseSalt));
  SplitMix64 source_seeds(derive_seed(options.seed, kPretrainSourceSalt));
  const std::size_t b = options.batch_size;
  const double inv_b = 1.0 / static_cast<double>(b);
  AdamWState opt;
  std::vector<std::size_t> order(b);
  std::vector<double> column(b);
  Matrix targets(b, out_dim);

  for (std::size_t step = 0; step < steps; ++step) {
    const Matrix z = sample_noise(b, model.input_dim(), noise);
    const Matrix x = generate(model, z);
    const Matrix y = sampler.sample(b, source_seeds.next());
    for (std::size_t k = 0; k < out_dim; ++k) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t c) { return z(a, k) < z(c, k); });
      for (std::size_t r = 0; r < b; ++r) column[r] = y(r, k);
      std::sort(column.begin(), column.end());
      for (std::size_t r = 0; r < b; ++r) targets(order[r], k) = column[r];
    }
    Matrix residual = x - targets;
    residual *= inv_b;
    const std::vector<double> grads = flatten(generator_backprop(model, z, residual));
    std::vector<double> params = model.parameters();
    optimizer_step(opt, params, grads, options.lr, options.optimizer);
    if (!all_finite(params)) {
      throw Error(ErrorKind::kNonFiniteLoss,
                  "pretrain_regression diverged at step " + std::to_string(step));
    }
    model.set_parameters(params);
  }
  return model;
}

double evaluate_fd(const GeneratorModel& model, const FdObjective& objective, std::size_t rep_index,
                   std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Matrix z = sample_noise(n, model.input_dim(), rng);
  const Matrix features = objective.reps.at(rep_index).featurize(generate(model, z));
  return fd(objective.refs.at(rep_index), stats_from_features(features));
}

}  // namespace fdloss
