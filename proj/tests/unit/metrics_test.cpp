#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "fdloss/error.hpp"
#include "fdloss/metrics.hpp"
#include "fdloss/rng.hpp"
#include "fdloss/target.hpp"
#include "oracles.hpp"

namespace fdloss {
namespace {

TEST(FdRatio, Examples) {
  EXPECT_EQ(fd_ratio(2.0, 4.0), 0.5);
  EXPECT_EQ(fd_ratio(0.0, 1.0), 0.0);
  EXPECT_EQ(fd_ratio(3.0, 3.0), 1.0);
  EXPECT_THROW(fd_ratio(1.0, 0.0), Error);
  EXPECT_THROW(fd_ratio(1.0, -1.0), Error);
}

TEST(FdrK, ArithmeticMean) {
  EXPECT_EQ(fdr_k(std::vector<double>{1.0, 3.0}), 2.0);
  EXPECT_EQ(fdr_k(std::vector<double>{0.7}), 0.7);
  EXPECT_THROW(fdr_k(std::vector<double>{}), Error);
}

TEST(FdrK, PermutationInvariantAndBounded) {
  SplitMix64 rng(1);
  std::vector<double> r(9);
  for (double& v : r) v = 0.1 + 3.0 * rng.uniform();
  const double base = fdr_k(r);
  EXPECT_GE(base, *std::min_element(r.begin(), r.end()));
  EXPECT_LE(base, *std::max_element(r.begin(), r.end()));
  std::reverse(r.begin(), r.end());
  EXPECT_NEAR(fdr_k(r), base, 1e-15);
}

struct Populations {
  RepresentationEnsemble ensemble;
  std::vector<ReferenceStats> train;
  Matrix train_raw;
  Matrix val;
  Matrix gen;
};

Populations three_populations(std::uint64_t seed) {
  SplitMix64 rng(seed);
  Populations p;
  p.ensemble.specs = {{RepresentationKind::kIdentity, 0, 3, 3, 1.0},
                      {RepresentationKind::kTanhRandomFeatures, 5, 3, 6, 1.0},
                      {RepresentationKind::kQuadratic, 0, 3, quadratic_out_dim(3), 1.0}};
  TargetSpec mixture;
  mixture.components = {{{-1.0, 0.0, 0.5}, Matrix::identity(3) * 0.5, 0.4},
                        {{1.0, 1.0, -0.5}, Matrix{{1.0, 0.2, 0.0}, {0.2, 0.6, 0.1}, {0.0, 0.1, 0.3}}, 0.6}};
  const TargetSampler sampler(mixture);
  p.train_raw = sampler.sample(4096, rng.next());
  p.val = sampler.sample(2048, rng.next());
  p.gen = sampler.sample(2048, rng.next());
  for (std::size_t r = 0; r < p.gen.rows(); ++r) p.gen(r, 0) += 0.3;
  for (const auto& spec : p.ensemble.specs)
    p.train.emplace_back(stats_from_features(featurize(spec, p.train_raw)));
  return p;
}

TEST(BuildReport, MatchesIndependentRecomputation) {
  const Populations p = three_populations(2);
  const FdrReport r = build_report_from_samples(p.ensemble, p.train, p.val, p.gen);
  ASSERT_EQ(r.entries.size(), 3u);
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    auto moments = [&](const Matrix& raw) {
      return oracle::naive_moments(oracle::rows_of(featurize(p.ensemble.specs[i], raw)));
    };
    const auto t = moments(p.train_raw);
    const auto v = moments(p.val);
    const auto g = moments(p.gen);
    const double fv = oracle::fd_oracle(t.mean, t.cov, v.mean, v.cov);
    const double fg = oracle::fd_oracle(t.mean, t.cov, g.mean, g.cov);
    EXPECT_NEAR(r.entries[i].fd_val, fv, 1e-9 * std::max(1.0, fv));
    EXPECT_NEAR(r.entries[i].fd_gen, fg, 1e-9 * std::max(1.0, fg));
    EXPECT_NEAR(r.entries[i].ratio, fg / fv, 1e-9 * (fg / fv));
    sum += fg / fv;
  }
  EXPECT_NEAR(r.fdr_k, sum / 3.0, 1e-9);
  EXPECT_EQ(r.entries[1].name, "tanh_rf_1");
  EXPECT_EQ(r.n_train, 4096.0);
  EXPECT_EQ(r.n_val, 2048u);
  EXPECT_EQ(r.n_gen, 2048u);
}

TEST(BuildReport, GeneratedEqualToValidationGivesOne) {
  const Populations p = three_populations(3);
  const FdrReport r = build_report_from_samples(p.ensemble, p.train, p.val, p.val);
  for (const auto& e : r.entries) EXPECT_EQ(e.ratio, 1.0);
  EXPECT_EQ(r.fdr_k, 1.0);
}

TEST(BuildReport, IdenticalSpecsGiveEqualRatios) {
  SplitMix64 rng(4);
  RepresentationEnsemble ens;
  const RepresentationSpec s{RepresentationKind::kAffine, 9, 2, 3, 1.0};
  ens.specs = {s, s, s, s};
  const Matrix train = rng.normal_matrix(500, 2);
  std::vector<ReferenceStats> stats(4, ReferenceStats(stats_from_features(featurize(s, train))));
  const FdrReport r =
      build_report_from_samples(ens, stats, rng.normal_matrix(300, 2), rng.normal_matrix(300, 2, 2.0));
  for (const auto& e : r.entries) EXPECT_EQ(e.ratio, r.entries[0].ratio);
  EXPECT_NEAR(r.fdr_k, r.entries[0].ratio, 1e-15);
}

TEST(BuildReport, InvariantToJointRescaling) {
  const Populations p = three_populations(5);
  // Identity features only: scaling every population by s scales each FD by s^2.
  RepresentationEnsemble ens;
  ens.specs = {p.ensemble.specs[0]};
  const FdrReport base = build_report_from_samples(ens, {p.train[0]}, p.val, p.gen);
  for (double s : {1e-3, 0.5, 7.0, 1e3}) {
    const ReferenceStats scaled(stats_from_features(p.train_raw * s));
    const FdrReport r = build_report_from_samples(ens, {scaled}, p.val * s, p.gen * s);
    EXPECT_NEAR(r.fdr_k, base.fdr_k, 1e-8 * base.fdr_k) << "scale " << s;
  }
}

TEST(BuildReport, ValidationEqualToTrainingIsRejected) {
  const Populations p = three_populations(6);
  try {
    build_report_from_samples(p.ensemble, p.train, p.train_raw, p.gen);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("identity_0"), std::string::npos);
  }
}

TEST(BuildReport, CountMismatch) {
  const Populations p = three_populations(7);
  EXPECT_THROW(build_report(p.ensemble, p.train, {p.val}, {p.gen}), Error);
}

}  // namespace
}  // namespace fdloss
