#include <benchmark/benchmark.h>

#include "brainalign/analysis.hpp"
#include "brainalign/metrics.hpp"
#include "brainalign/synthetic.hpp"

using namespace brainalign;

static void BM_WilcoxonExact(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(a, b).p_value);
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(25)->Arg(200);

static void BM_RdmRsa(benchmark::State& state) {
  Rng rng(5);
  const auto m = state.range(0);
  std::vector<std::string> ids;
  for (Index i = 0; i < m; ++i) ids.push_back("s" + std::to_string(i));
  const Matrix x = synthetic::gaussian(m, 256, rng);
  const Matrix y = synthetic::gaussian(m, 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(rsa_score(rdm_compute(x, ids), rdm_compute(y, ids)));
}
BENCHMARK(BM_RdmRsa)->Arg(100)->Arg(400);

static void BM_Cka(benchmark::State& state) {
  Rng rng(6);
  const Matrix x = synthetic::gaussian(state.range(0), 512, rng);
  const Matrix y = synthetic::gaussian(state.range(0), 128, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cka(x, y));
}
BENCHMARK(BM_Cka)->Arg(200)->Arg(1000);
