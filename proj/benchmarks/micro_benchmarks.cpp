#include "hybridml/feature_integration.hpp"
#include "hybridml/hyperopt/gp.hpp"
#include "hybridml/learners/forest.hpp"
#include "hybridml/learners/svm.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace hybridml;

void make_classification(Index n, Index d, std::uint64_t seed, Matrix& x, Vector& y) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(n, d);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = normal(rng);
    y(i) = x(i, 0) + 0.5 * x(i, 1) + 0.5 * normal(rng) > 0.0 ? 1.0 : 0.0;
  }
}

void BM_GpFit(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(n, 4);
  Vector f(n);
  for (Index i = 0; i < x.size(); ++i) x(i) = u(rng);
  for (Index i = 0; i < n; ++i) f(i) = std::sin(5.0 * x(i, 0)) + x.row(i).squaredNorm();
  for (auto _ : state) benchmark::DoNotOptimize(hyperopt::gp_fit(x, f, hyperopt::GpConfig{}));
}
BENCHMARK(BM_GpFit)->Arg(10)->Arg(20)->Arg(40);

void BM_SvmSmo(benchmark::State& state) {
  Matrix x;
  Vector y;
  make_classification(state.range(0), 13, 2, x, y);
  for (auto _ : state) benchmark::DoNotOptimize(learners::svm_train(x, y, learners::SvmConfig{}));
}
BENCHMARK(BM_SvmSmo)->Arg(100)->Arg(200);

void BM_RandomForest(benchmark::State& state) {
  Matrix x;
  Vector y;
  make_classification(180, 13, 3, x, y);
  learners::ForestConfig cfg;
  cfg.n_trees = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(learners::rf_train(x, y, cfg));
}
BENCHMARK(BM_RandomForest)->Arg(50)->Arg(200);

void BM_MutualInformation(benchmark::State& state) {
  Matrix x;
  Vector y;
  make_classification(state.range(0), 2, 4, x, y);
  const Vector a = x.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(features::mutual_information(a, y));
}
BENCHMARK(BM_MutualInformation)->Arg(300)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
