#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vulncur/evaluation.hpp"

namespace {

void BM_VdScore(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<vulncur::evaluation::Scored> samples;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    const bool v = i % 20 == 0;
    samples.push_back({v ? 0.3 + 0.7 * unit(rng) : 0.7 * unit(rng), v});
  }
  for (auto _ : state) benchmark::DoNotOptimize(vulncur::evaluation::vd_score(samples, 0.005));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VdScore)->RangeMultiplier(10)->Range(100, 1000000)->Complexity(benchmark::oNLogN);

}  // namespace
