#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdloss/error.hpp"
#include "fdloss/estimators.hpp"
#include "fdloss/frechet.hpp"
#include "fdloss/generator.hpp"
#include "fdloss/optimizer.hpp"
#include "fdloss/representations.hpp"
#include "fdloss/rng.hpp"
#include "fdloss/target.hpp"

namespace fdloss {

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::kEma;
  double beta = 0.999;         // EMA decay
  std::size_t capacity = 1024;  // queue size N
};

struct PretrainOptions {
  std::size_t batch_size = 256;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  AdamWConfig optimizer;
};

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t total_steps = 3000;
  std::size_t warmup_steps = 150;
  double peak_lr = 1e-3;
  AdamWConfig optimizer;  // betas 0.9 / 0.95, eps 1e-8, no weight decay
  EstimatorConfig estimator;
  // Base-model samples used to warm-start the estimators; 0 selects max(capacity, 4096).
  std::size_t warm_start_count = 0;
  RepresentationEnsemble ensemble;
  TargetSpec target;
  std::uint64_t seed = 0;

  // Generator shape for fresh initialization.
  std::size_t z_dim = 8;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t out_dim = 2;

  // Regression pretraining toward `source` (the base model of the repurposing flow).
  TargetSpec source;
  std::size_t pretrain_steps = 0;
  double pretrain_lr = 1e-2;
  std::size_t pretrain_batch_size = 256;

  PretrainOptions pretrain_options() const;

  // Fresh generated samples used by evaluate_fd.
  std::size_t eval_count = 8192;

  std::vector<std::size_t> layer_dims() const;
  std::size_t effective_warm_start_count() const noexcept;
  LrSchedule schedule() const noexcept { return {total_steps, warmup_steps, peak_lr}; }
  void validate() const;
};

struct MetricsRecord {
  std::string phase;  // "warmstart" or "train"
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::vector<double> fd;  // per representation, floored raw FD
};

struct MetricsLog {
  std::vector<std::string> rep_names;
  std::vector<MetricsRecord> records;
};

struct TrainResult {
  GeneratorModel model;
  MetricsLog log;
};

// Thrown when the loss or a gradient becomes non-finite. Holds the parameters from before the
// failing step.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, std::size_t step, GeneratorModel last_good)
      : Error(ErrorKind::kNonFiniteLoss, what), step_(step), last_good_(std::move(last_good)) {}

  std::size_t step() const noexcept { return step_; }
  const GeneratorModel& last_good() const noexcept { return last_good_; }

 private:
  std::size_t step_;
  GeneratorModel last_good_;
};

// Fixed pieces of an FD-loss objective: one representation, reference statistics and
// estimator per ensemble member.
struct FdObjective {
  RepresentationEnsemble ensemble;
  std::vector<Representation> reps;
  std::vector<ReferenceStats> refs;

  // Featurizes `reference_samples` under every representation.
  static FdObjective build(const RepresentationEnsemble& ensemble, const Matrix& reference_samples);
};

struct StepEvaluation {
  double loss = 0.0;
  std::vector<double> fd;            // floored, per representation
  std::vector<double> grad_scales;   // w_i / (fd_i + c)
  std::vector<double> param_grads;   // flattened, GeneratorModel::parameters() order
  std::vector<Matrix> features;      // live batch features per representation, for commit
  bool degenerate = false;
};

// Forward and backward pass of the normalized FD-loss for noise batch `z`, with the
// estimators held fixed (no commit).
StepEvaluation evaluate_step(const GeneratorModel& model, const Matrix& z,
                             const FdObjective& objective,
                             const std::vector<Estimator>& estimators);

std::vector<Estimator> make_estimators(const EstimatorConfig& config,
                                       const RepresentationEnsemble& ensemble);

Matrix sample_noise(std::size_t rows, std::size_t z_dim, SplitMix64& rng);

// Post-trains `base` with the FD-loss. Per step: noise -> generate -> featurize per
// representation -> estimator statistics -> FD -> normalized ensemble loss -> chain rule back to
// the generator parameters -> AdamW -> estimator commit. The estimators are warm-started from
// base-model samples before step 0, and the log starts with that warm-start record.
TrainResult post_train(const TrainConfig& config, const GeneratorModel& base);
// Fresh generator from config.layer_dims() and config.seed.
TrainResult post_train(const TrainConfig& config);

// Least-squares regression of generate(z) onto a per-coordinate quantile transport of z toward
// `source`: within each batch, output coordinate k of the sample whose z_k has rank r is pulled
// toward the rank-r value of coordinate k in a fresh source batch. Requires z_dim >= out_dim.
//
// The result stands in for a base model already read as a one-step generator. A multi-step
// model would be read the same way through a single evaluation at t = 1: x0 = z - v(z, 1) for
// velocity prediction, or the network output itself for x0 prediction. Neither is built here.
GeneratorModel pretrain_regression(GeneratorModel model, const TargetSpec& source,
                                   std::size_t steps, const PretrainOptions& options);

// FD between `n` fresh generated samples (noise stream `seed`) and the reference statistics of
// representation `rep_index`.
double evaluate_fd(const GeneratorModel& model, const FdObjective& objective, std::size_t rep_index,
                   std::size_t n, std::uint64_t seed);

}  // namespace fdloss
