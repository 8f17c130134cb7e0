#include <benchmark/benchmark.h>

#include "fdloss/estimators.hpp"
#include "fdloss/frechet.hpp"
#include "fdloss/rng.hpp"
#include "fdloss/symlin.hpp"
#include "fdloss/trainer.hpp"

namespace {

using namespace fdloss;

Matrix psd(std::size_t d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Matrix a = rng.normal_matrix(d, d);
  Matrix s = matmul(a.transposed(), a) * (1.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) s(i, i) += 0.1;
  return symmetrized(s);
}

void BM_EigSym(benchmark::State& state) {
  const Matrix a = psd(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(a));
}
BENCHMARK(BM_EigSym)->Arg(2)->Arg(16)->Arg(64);

void BM_TraceSqrtProduct(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix root = sqrt_psd(psd(d, 2));
  const Matrix s = psd(d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(trace_sqrt_product(root, s));
}
BENCHMARK(BM_TraceSqrtProduct)->Arg(2)->Arg(16)->Arg(64);

void BM_FdGrad(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const ReferenceStats ref({Vector(d, 0.0), psd(d, 4), 1.0});
  const GaussianStats gen{Vector(d, 0.5), psd(d, 5), 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(fd_grad_stats(ref, gen));
}
BENCHMARK(BM_FdGrad)->Arg(16)->Arg(64);

void BM_EmaStatsAndBackprop(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng(6);
  Estimator est{EmaState(0.999, d)};
  est.warm_start(rng.normal_matrix(1024, d));
  const Matrix batch = rng.normal_matrix(128, d);
  const Matrix d_sigma = Matrix::identity(d);
  const Vector d_mu(d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.stats_with_batch(batch));
    benchmark::DoNotOptimize(est.backprop(batch, d_mu, d_sigma));
  }
}
BENCHMARK(BM_EmaStatsAndBackprop)->Arg(16)->Arg(64);

// One full post-training step on the bundled task shape: 8 -> 64 -> 64 -> 2 generator, batch
// 128, identity + 16-feature tanh ensemble.
void BM_TrainStep(benchmark::State& state) {
  RepresentationEnsemble ens;
  ens.specs = {{RepresentationKind::kIdentity, 0, 2, 2, 1.0},
               {RepresentationKind::kTanhRandomFeatures, 7, 2, 16, 1.0}};
  SplitMix64 rng(7);
  const FdObjective obj = FdObjective::build(ens, rng.normal_matrix(8192, 2));
  std::vector<Estimator> est = make_estimators({EstimatorKind::kEma, 0.999, 1024}, ens);
  const GeneratorModel model = GeneratorModel::initialized({8, 64, 64, 2}, 1);
  const Matrix warm = generate(model, rng.normal_matrix(4096, 8));
  for (std::size_t i = 0; i < est.size(); ++i) est[i].warm_start(obj.reps[i].featurize(warm));
  const Matrix z = rng.normal_matrix(128, 8);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_step(model, z, obj, est));
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
