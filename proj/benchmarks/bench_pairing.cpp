#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "vulncur/pairing.hpp"

namespace {

std::string random_code(std::mt19937_64& rng, std::size_t n) {
  static const char kAlphabet[] = "abcdefghij(){};=+-*<> \n";
  std::string s(n, ' ');
  for (auto& c : s) c = kAlphabet[rng() % (sizeof(kAlphabet) - 1)];
  return s;
}

// a patch touches a few percent of the function
void BM_Similarity(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_code(rng, n);
  auto b = a;
  for (std::size_t i = 0; i < n / 30 + 1; ++i) b[rng() % n] = 'z';
  for (auto _ : state) benchmark::DoNotOptimize(vulncur::pairing::similarity(a, b));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Similarity)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oNSquared);

}  // namespace
