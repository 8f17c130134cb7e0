#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <string_view>

#include <CLI11.hpp>

#include "fdloss/config.hpp"
#include "fdloss/csv.hpp"
#include "fdloss/error.hpp"
#include "fdloss/formats.hpp"
#include "fdloss/metrics.hpp"
#include "fdloss/trainer.hpp"

namespace fdloss {

namespace {

enum class Verbosity { kQuiet, kWarn, kInfo };

// FDLOSS_LOG_LEVEL=quiet|warn|info, default warn. Diagnostics go to stderr only.
Verbosity verbosity_from_env() {
  const char* env = std::getenv("FDLOSS_LOG_LEVEL");
  if (env == nullptr) return Verbosity::kWarn;
  const std::string_view v(env);
  if (v == "quiet") return Verbosity::kQuiet;
  if (v == "info") return Verbosity::kInfo;
  return Verbosity::kWarn;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  Verbosity verbosity = Verbosity::kWarn;

  void info(const std::string& msg) const {
    if (verbosity == Verbosity::kInfo) err << "info: " << msg << "\n";
  }
  void flush_log(const ComputationLog& log) const {
    for (const auto& e : log.entries()) {
      const bool warn = e.level == ComputationLog::Level::kWarning;
      if (warn && verbosity != Verbosity::kQuiet) err << "warning: " << e.message << "\n";
      if (!warn) info(e.message);
    }
  }
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Representation rep_from_config(const TrainConfig& config, std::size_t index) {
  if (index >= config.ensemble.size()) {
    throw Error(ErrorKind::kUsage, "--rep-index " + std::to_string(index) + " out of range; the ensemble has " +
                                       std::to_string(config.ensemble.size()) + " representations");
  }
  return Representation(config.ensemble.specs[index]);
}

bool is_features_file(const std::string& path) { return read_magic(path) == "FDF1"; }

// --- compute-stats -----------------------------------------------------------------------

struct ComputeStatsArgs {
  std::string features, out, config;
  std::size_t rep_index = 0;
};

void run_compute_stats(const ComputeStatsArgs& a, const Context& ctx) {
  Matrix features = read_features(a.features);
  if (!a.config.empty()) {
    features = rep_from_config(load_train_config(a.config), a.rep_index).featurize(features);
  }
  const GaussianStats stats = stats_from_features(features);
  write_stats(a.out, stats);
  ctx.info("wrote stats of " + std::to_string(features.rows()) + " rows, d=" +
           std::to_string(stats.dim()) + " to " + a.out);
}

// --- fd ----------------------------------------------------------------------------------

struct FdArgs {
  std::string ref, gen, rep;
  std::size_t rep_index = 0;
};

void run_fd(const FdArgs& a, const Context& ctx) {
  ComputationLog log;
  const ReferenceStats ref(read_stats(a.ref), &log);
  GaussianStats gen;
  if (is_features_file(a.gen)) {
    Matrix features = read_features(a.gen);
    if (!a.rep.empty()) features = rep_from_config(load_train_config(a.rep), a.rep_index).featurize(features);
    gen = stats_from_features(features);
  } else {
    if (!a.rep.empty()) {
      throw Error(ErrorKind::kUsage, "--rep applies to feature files only; " + a.gen + " holds statistics");
    }
    gen = read_stats(a.gen);
  }
  if (gen.dim() != ref.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "reference has d=" + std::to_string(ref.dim()) +
                                                   ", generated side has d=" + std::to_string(gen.dim()));
  }
  const double value = fd(ref, gen, &log);
  ctx.flush_log(log);
  ctx.out << fixed6(value) << "\n";
}

// --- fdr ---------------------------------------------------------------------------------

struct FdrArgs {
  std::vector<std::string> train, val, gen;
  std::string config, out;
};

// One file holds raw samples, mapped through every representation; K files hold
// per-representation features in ensemble order.
std::vector<Matrix> load_population(const std::vector<std::string>& paths,
                                    const std::vector<Representation>& reps, const char* flag) {
  std::vector<Matrix> out;
  if (paths.size() == 1) {
    const Matrix samples = read_features(paths.front());
    for (const auto& rep : reps) out.push_back(rep.featurize(samples));
  } else if (paths.size() == reps.size()) {
    for (const auto& p : paths) out.push_back(read_features(p));
  } else {
    throw Error(ErrorKind::kUsage, std::string(flag) + " takes one sample file or one feature file per representation (" +
                                       std::to_string(reps.size()) + ")");
  }
  return out;
}

void run_fdr(const FdrArgs& a, const Context& ctx) {
  const TrainConfig config = load_train_config(a.config);
  std::vector<Representation> reps;
  for (const auto& spec : config.ensemble.specs) reps.emplace_back(spec);

  ComputationLog log;
  std::vector<ReferenceStats> train;
  if (a.train.size() == 1 && is_features_file(a.train.front())) {
    for (const auto& f : load_population(a.train, reps, "--train")) train.emplace_back(stats_from_features(f), &log);
  } else if (a.train.size() == reps.size()) {
    for (const auto& p : a.train) train.emplace_back(read_stats(p), &log);
  } else {
    throw Error(ErrorKind::kUsage, "--train takes one sample file or one stats file per representation (" +
                                       std::to_string(reps.size()) + ")");
  }
  const FdrReport report =
      build_report(config.ensemble, train, load_population(a.val, reps, "--val"), load_population(a.gen, reps, "--gen"));
  ctx.flush_log(log);
  write_report_csv(report, a.out);
  ctx.out << "FDr^" << report.entries.size() << " = " << format_number(report.fdr_k, 9) << "\n";
}

// --- train / pretrain --------------------------------------------------------------------

struct TrainArgs {
  std::string config, out, log, init;
};

void run_train(const TrainArgs& a, const Context& ctx) {
  const TrainConfig config = load_train_config(a.config);
  const GeneratorModel base = a.init.empty() ? GeneratorModel::initialized(config.layer_dims(), config.seed)
                                             : read_checkpoint(a.init);
  ctx.info("training " + std::to_string(config.total_steps) + " steps, " +
           std::to_string(base.parameter_count()) + " parameters");
  try {
    const TrainResult result = post_train(config, base);
    write_checkpoint(a.out, result.model);
    write_metrics_log(result.log, a.log);
    const auto& last = result.log.records.back();
    ctx.info("final loss " + format_number(last.loss, 9));
  } catch (const TrainingAborted& e) {
    const std::string keep = a.out + ".last_good";
    write_checkpoint(keep, e.last_good());
    ctx.err << "error: training aborted at step " << e.step() << "; last good parameters written to " << keep
            << "\n";
    throw;
  }
}

struct PretrainArgs {
  std::string config, out, init;
};

void run_pretrain(const PretrainArgs& a, const Context& ctx) {
  const TrainConfig config = load_train_config(a.config);
  if (!config.source.is_mixture() && config.source.path.empty()) {
    throw Error(ErrorKind::kConfig, a.config + ": pretrain needs a [source] section");
  }
  const GeneratorModel base = a.init.empty() ? GeneratorModel::initialized(config.layer_dims(), config.seed)
                                             : read_checkpoint(a.init);
  ctx.info("pretraining " + std::to_string(config.pretrain_steps) + " steps toward the source");
  write_checkpoint(a.out, pretrain_regression(base, config.source, config.pretrain_steps, config.pretrain_options()));
}

// --- sample ------------------------------------------------------------------------------

struct SampleArgs {
  std::string ckpt, target;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_sample(const SampleArgs& a, const Context& ctx) {
  if (a.ckpt.empty() == a.target.empty()) {
    throw Error(ErrorKind::kUsage, "sample needs exactly one of --ckpt or --target");
  }
  if (a.n == 0) throw Error(ErrorKind::kUsage, "--n must be at least 1");
  Matrix samples;
  if (!a.ckpt.empty()) {
    const GeneratorModel model = read_checkpoint(a.ckpt);
    SplitMix64 rng(a.seed);
    samples = generate(model, sample_noise(a.n, model.input_dim(), rng));
  } else {
    samples = TargetSampler(load_train_config(a.target).target).sample(a.n, a.seed);
  }
  write_features(a.out, samples);
  ctx.info("wrote " + std::to_string(samples.rows()) + " samples to " + a.out);
}

// --- report ------------------------------------------------------------------------------

void run_report(const std::string& path, const Context& ctx) {
  const MetricsLog log = read_metrics_log(path);
  if (log.records.empty()) throw Error(ErrorKind::kInvalidArgument, path + ": metrics log has no records");
  ctx.out << "rep,first,last,best,best_step\n";
  for (std::size_t k = 0; k < log.rep_names.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < log.records.size(); ++i) {
      if (log.records[i].fd[k] < log.records[best].fd[k]) best = i;
    }
    const auto& b = log.records[best];
    ctx.out << log.rep_names[k] << "," << format_number(log.records.front().fd[k], 9) << ","
            << format_number(log.records.back().fd[k], 9) << "," << format_number(b.fd[k], 9) << ","
            << b.phase << ":" << b.step << "\n";
  }
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Context ctx{out, err, verbosity_from_env()};

  CLI::App app{"Frechet distance as a training loss: statistics, FD, FDr reports, post-training", "fdloss"};
  app.require_subcommand(1);
  app.fallthrough(false);

  ComputeStatsArgs cs;
  auto* compute_stats = app.add_subcommand("compute-stats", "Mean and covariance of a feature file");
  compute_stats->add_option("--features", cs.features, "FeatureFile (FDF1)")->required();
  compute_stats->add_option("--out", cs.out, "Output StatsFile (FDS1)")->required();
  compute_stats->add_option("--config", cs.config, "Map samples through a representation of this config first");
  compute_stats->add_option("--rep-index", cs.rep_index, "Representation index within the ensemble");

  FdArgs fa;
  auto* fd_cmd = app.add_subcommand("fd", "Frechet distance between reference stats and a stats or feature file");
  fd_cmd->add_option("--ref", fa.ref, "Reference StatsFile")->required();
  fd_cmd->add_option("--gen", fa.gen, "Generated StatsFile or FeatureFile")->required();
  fd_cmd->add_option("--rep", fa.rep, "Config whose representation maps the generated features first");
  fd_cmd->add_option("--rep-index", fa.rep_index, "Representation index within the ensemble");

  FdrArgs ra;
  auto* fdr = app.add_subcommand("fdr", "FDr per representation and FDr^K, written as CSV");
  fdr->add_option("--train", ra.train, "Training samples, or one StatsFile per representation")->required();
  fdr->add_option("--val", ra.val, "Validation samples, or one FeatureFile per representation")->required();
  fdr->add_option("--gen", ra.gen, "Generated samples, or one FeatureFile per representation")->required();
  fdr->add_option("--config", ra.config, "Config holding the representation ensemble")->required();
  fdr->add_option("--out", ra.out, "Report CSV path")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Post-train a generator with the FD loss");
  train->add_option("--config", ta.config, "Training config")->required();
  train->add_option("--out", ta.out, "Output checkpoint (FDC1)")->required();
  train->add_option("--log", ta.log, "Metrics log CSV")->required();
  train->add_option("--init", ta.init, "Base checkpoint; default is a fresh generator from the config seed");

  PretrainArgs pa;
  auto* pretrain = app.add_subcommand("pretrain", "Regress a generator onto the config's [source] distribution");
  pretrain->add_option("--config", pa.config, "Config with [source] and [pretrain] sections")->required();
  pretrain->add_option("--out", pa.out, "Output checkpoint (FDC1)")->required();
  pretrain->add_option("--init", pa.init, "Starting checkpoint; default is a fresh generator");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw samples from a checkpoint or from a config's target");
  sample->add_option("--ckpt", sa.ckpt, "Generator checkpoint");
  sample->add_option("--target", sa.target, "Config whose [target] is sampled instead");
  sample->add_option("--n", sa.n, "Number of samples")->required();
  sample->add_option("--seed", sa.seed, "Noise seed")->required();
  sample->add_option("--out", sa.out, "Output FeatureFile")->required();

  std::string report_log;
  auto* report = app.add_subcommand("report", "First, last and best FD per representation in a metrics log");
  report->add_option("--log", report_log, "Metrics log CSV")->required();

  if (!args.empty() && !args.front().empty() && args.front().front() != '-' &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "error: unknown subcommand '" << args.front() << "'\n" << app.help();
    return 1;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return 1;
  }

  try {
    if (compute_stats->parsed()) run_compute_stats(cs, ctx);
    else if (fd_cmd->parsed()) run_fd(fa, ctx);
    else if (fdr->parsed()) run_fdr(ra, ctx);
    else if (train->parsed()) run_train(ta, ctx);
    else if (pretrain->parsed()) run_pretrain(pa, ctx);
    else if (sample->parsed()) run_sample(sa, ctx);
    else if (report->parsed()) run_report(report_log, ctx);
    return 0;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    if (e.kind() == ErrorKind::kUsage) err << app.get_subcommands().front()->help();
    return exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace fdloss
