#include "fdloss/metrics.hpp"

#include <algorithm>
#include <string>

#include "fdloss/error.hpp"

namespace fdloss {

double fd_ratio(double gen_fd, double val_fd) {
  if (!(val_fd > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "fd_ratio: validation FD must be positive, got " + std::to_string(val_fd));
  }
  return gen_fd / val_fd;
}

double fdr_k(std::span<const double> ratios) {
  if (ratios.empty()) throw Error(ErrorKind::kInvalidArgument, "fdr_k: no ratios");
  double sum = 0.0;
  for (double r : ratios) sum += r;
  return sum / static_cast<double>(ratios.size());
}

FdrReport build_report(const RepresentationEnsemble& ensemble,
                       const std::vector<ReferenceStats>& train_stats,
                       const std::vector<Matrix>& val_features,
                       const std::vector<Matrix>& gen_features) {
  const std::size_t k = ensemble.size();
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "build_report: empty ensemble");
  if (train_stats.size() != k || val_features.size() != k || gen_features.size() != k) {
    throw Error(ErrorKind::kDimensionMismatch,
                "build_report: need training stats and features for each of " +
                    std::to_string(k) + " representations");
  }
  FdrReport report;
  report.n_train = train_stats.front().stats().weight;
  report.n_val = val_features.front().rows();
  report.n_gen = gen_features.front().rows();

  std::vector<double> ratios;
  for (std::size_t i = 0; i < k; ++i) {
    FdrEntry e;
    e.name = ensemble.name(i);
    const GaussianStats val = stats_from_features(val_features[i]);
    e.fd_val = fd(train_stats[i], val);
    e.fd_gen = fd(train_stats[i], stats_from_features(gen_features[i]));
    // Identical populations leave only rounding residue in the trace difference.
    const double residue = 1e-12 * std::max(1.0, train_stats[i].sigma_trace() + trace(val.sigma));
    if (!(e.fd_val > residue)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "build_report: validation FD is zero for representation " + e.name +
                      "; validation set matches training statistics");
    }
    e.ratio = fd_ratio(e.fd_gen, e.fd_val);
    ratios.push_back(e.ratio);
    report.entries.push_back(std::move(e));
  }
  report.fdr_k = fdr_k(ratios);
  return report;
}

FdrReport build_report_from_samples(const RepresentationEnsemble& ensemble,
                                    const std::vector<ReferenceStats>& train_stats,
                                    const Matrix& val_samples, const Matrix& gen_samples) {
  std::vector<Matrix> val;
  std::vector<Matrix> gen;
  for (const auto& spec : ensemble.specs) {
    const Representation rep(spec);
    val.push_back(rep.featurize(val_samples));
    gen.push_back(rep.featurize(gen_samples));
  }
  return build_report(ensemble, train_stats, val, gen);
}

}  // namespace fdloss
