#pragma once

#include <span>
#include <string>
#include <vector>

#include "fdloss/frechet.hpp"
#include "fdloss/representations.hpp"

namespace fdloss {

// FD(G, T) / FD(V, T). Throws for val_fd <= 0.
double fd_ratio(double gen_fd, double val_fd);

// Arithmetic mean of the per-representation ratios. Throws for an empty input.
double fdr_k(std::span<const double> ratios);

struct FdrEntry {
  std::string name;
  double fd_gen = 0.0;  // FD(G, T)
  double fd_val = 0.0;  // FD(V, T)
  double ratio = 0.0;
};

struct FdrReport {
  std::vector<FdrEntry> entries;
  double fdr_k = 0.0;
  double n_train = 0.0;  // weight of the training statistics (first representation)
  std::size_t n_val = 0;
  std::size_t n_gen = 0;
};

// Per-representation features of the validation and generated populations, already mapped
// through the ensemble's specs. Throws naming the representation when FD(V, T) is zero.
FdrReport build_report(const RepresentationEnsemble& ensemble,
                       const std::vector<ReferenceStats>& train_stats,
                       const std::vector<Matrix>& val_features,
                       const std::vector<Matrix>& gen_features);

// Same, featurizing raw validation and generated samples with each spec first.
FdrReport build_report_from_samples(const RepresentationEnsemble& ensemble,
                                    const std::vector<ReferenceStats>& train_stats,
                                    const Matrix& val_samples, const Matrix& gen_samples);

}  // namespace fdloss
