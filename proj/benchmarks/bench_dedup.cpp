#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "vulncur/dedup.hpp"

namespace {

std::string function_body(std::mt19937_64& rng, std::size_t lines) {
  std::string out = "static int handler(struct ctx *c, const char *buf, size_t n) {\n";
  for (std::size_t i = 0; i < lines; ++i) {
    out += "    if (c->state[" + std::to_string(rng() % 64) + "] > n)\t{ return -" +
           std::to_string(rng() % 100) + "; }\r\n";
  }
  return out + "    return 0;\n}\n";
}

void BM_Normalize(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto code = function_body(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vulncur::dedup::normalize(code));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * code.size()));
}
BENCHMARK(BM_Normalize)->Arg(10)->Arg(100)->Arg(1000);

void BM_Digest(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto code = function_body(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vulncur::dedup::digest(code));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * code.size()));
}
BENCHMARK(BM_Digest)->Arg(10)->Arg(100)->Arg(1000);

// records with ~10% whitespace-variant duplicates
std::vector<vulncur::FunctionChangeRecord> corpus(std::size_t n) {
  std::mt19937_64 rng(3);
  std::vector<vulncur::FunctionChangeRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    vulncur::FunctionChangeRecord r;
    r.source_dataset = "bench";
    r.commit_hash = std::to_string(i / 5);
    r.commit_date = static_cast<vulncur::Timestamp>(i / 5);
    r.file_path = "src/f.c";
    r.function_name = "fn" + std::to_string(i);
    r.record_id = r.source_dataset + ":" + r.commit_hash + ":" + r.file_path + ":" + r.function_name;
    r.changed = i % 5 == 0;
    auto before = (i % 10 == 9 && i >= 10) ? *out[i - 9].code_before + " " : function_body(rng, 20);
    r.code_before = before;
    r.code_after = r.changed ? before + "/* patched */" : before;
    out.push_back(std::move(r));
  }
  return out;
}

void BM_DedupCorpus(benchmark::State& state) {
  const auto recs = corpus(static_cast<std::size_t>(state.range(0)));
  const auto jobs = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(vulncur::dedup::dedup_corpus(recs, jobs));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * recs.size()));
}
BENCHMARK(BM_DedupCorpus)->Args({1000, 1})->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);

}  // namespace
