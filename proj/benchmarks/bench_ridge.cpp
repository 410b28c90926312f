#include <benchmark/benchmark.h>

#include "brainalign/predictivity.hpp"
#include "brainalign/ridge.hpp"
#include "brainalign/splits.hpp"
#include "brainalign/synthetic.hpp"

using namespace brainalign;

static void BM_RidgeFit(benchmark::State& state) {
  Rng rng(1);
  const auto n = state.range(0), p = state.range(1);
  const Matrix x = synthetic::gaussian(n, p, rng);
  const Matrix y = synthetic::gaussian(n, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ridge_fit(x, y, 1.0).weights.data());
}
BENCHMARK(BM_RidgeFit)->Args({200, 64})->Args({400, 256})->Args({600, 768});

static void BM_RidgePathGrid(benchmark::State& state) {
  Rng rng(2);
  const auto n = state.range(0), p = state.range(1);
  Matrix x = synthetic::gaussian(n, p, rng);
  x.rowwise() -= x.colwise().mean();
  Matrix y = synthetic::gaussian(n, 32, rng);
  y.rowwise() -= y.colwise().mean();
  const auto grid = RidgeConfig::default_lambda_grid();
  for (auto _ : state) {
    const RidgePath path(x);
    benchmark::DoNotOptimize(path.predictions(x, y, grid).size());
  }
}
BENCHMARK(BM_RidgePathGrid)->Args({200, 64})->Args({400, 256});

static void BM_LinearPredictivity(benchmark::State& state) {
  Rng rng(3);
  const Index n = 240;
  std::vector<std::string> ids;
  std::map<std::string, std::string> groups;
  for (Index i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    groups[ids.back()] = "g" + std::to_string(i / 10);
  }
  const Matrix x = synthetic::gaussian(n, state.range(0), rng);
  const Matrix y = x.leftCols(16) + synthetic::gaussian(n, 16, rng);
  const auto folds = make_grouped_folds(groups, 10, 0);
  PredictivityOptions opts;
  opts.groups = &groups;
  for (auto _ : state) benchmark::DoNotOptimize(linear_predictivity(x, y, ids, folds, RidgeConfig{}, opts).mean_r);
}
BENCHMARK(BM_LinearPredictivity)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
