#pragma once

// Stage runners over a work directory. Each stage reads only the manifests
// written by the stage before it, so any stage can be re-run on its own.
//
//   ingest  <input>                      -> records.jsonl   ingest_report.json
//   dedup   records.jsonl                -> deduped.jsonl   dedup_report.json
//   label   deduped.jsonl + <nvd>        -> labeled.jsonl   label_report.json
//   split   labeled.jsonl                -> split.jsonl     split_report.json
//                                           train.jsonl dev.jsonl test.jsonl
//   pair    labeled.jsonl + split.jsonl  -> pairs.jsonl     pair_report.json

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vulncur/dedup.hpp"
#include "vulncur/labeling.hpp"
#include "vulncur/model.hpp"
#include "vulncur/pairing.hpp"
#include "vulncur/splitting.hpp"

namespace vulncur::pipeline {

namespace files {
inline constexpr const char* kRecords = "records.jsonl";
inline constexpr const char* kIngestReport = "ingest_report.json";
inline constexpr const char* kDeduped = "deduped.jsonl";
inline constexpr const char* kDedupReport = "dedup_report.json";
inline constexpr const char* kLabeled = "labeled.jsonl";
inline constexpr const char* kLabelReport = "label_report.json";
inline constexpr const char* kSplit = "split.jsonl";
inline constexpr const char* kSplitReport = "split_report.json";
inline constexpr const char* kPairs = "pairs.jsonl";
inline constexpr const char* kPairReport = "pair_report.json";
std::string split_corpus(SplitName s);  // "train.jsonl", ...
}  // namespace files

struct Config {
  std::filesystem::path input;
  std::filesystem::path nvd;  // empty: no feed, NVDCheck labels nothing
  std::filesystem::path workdir = ".";
  std::vector<std::string> exclude_sources;
  labeling::LabelingOptions labeling;
  splitting::Fractions fractions = {0.8, 0.1, 0.1};
  double similarity_threshold = 0.8;
  EvalConfig eval;
  unsigned jobs = 1;
};

using Report = nlohmann::ordered_json;

Report run_ingest(const Config& config);
Report run_dedup(const Config& config);
Report run_label(const Config& config);
Report run_split(const Config& config);
Report run_pair(const Config& config);

/// ingest -> dedup -> label -> split -> pair; returns {stage: report}.
Report run_all(const Config& config);

struct EvaluationResult {
  SplitName split = SplitName::Test;
  EvalReport metrics;
  PairOutcomeReport pairs;
};

/// Scores `predictions` on one split of the work directory's labeled corpus
/// and its pairs.
EvaluationResult run_evaluate(const Config& config, const std::filesystem::path& predictions,
                              SplitName split);
Report to_json(const EvaluationResult& result);

// Manifest readers; errors carry the file name.
std::vector<FunctionChangeRecord> read_records(const std::filesystem::path& path,
                                               unsigned jobs = 1);
std::vector<LabeledFunction> read_labeled(const std::filesystem::path& path);
DatasetSplit read_split(const std::filesystem::path& path);
std::vector<FunctionPair> read_pairs(const std::filesystem::path& path);

void write_labeled(const std::filesystem::path& path, const std::vector<LabeledFunction>& corpus);

Report to_json(const dedup::DedupReport& r);
Report to_json(const labeling::LabelReport& r);
Report to_json(const pairing::PairReport& r);
Report split_report(std::span<const LabeledFunction> labeled, const DatasetSplit& split);

}  // namespace vulncur::pipeline
