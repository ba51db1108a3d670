#include "vulncur/pipeline.hpp"

#include <unordered_set>

#include "vulncur/error.hpp"
#include "vulncur/evaluation.hpp"
#include "vulncur/ingest.hpp"
#include "vulncur/jsonl.hpp"
#include "vulncur/serialize.hpp"

namespace vulncur::pipeline {

namespace fs = std::filesystem;

std::string files::split_corpus(SplitName s) { return std::string(to_string(s)) + ".jsonl"; }

namespace {

template <typename Fn>
auto with_file_context(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == Errc::Io) throw;
    throw e.with_file(path.string());
  }
}

void ensure_workdir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, dir.string(), std::nullopt, ec.message());
}

}  // namespace

std::vector<FunctionChangeRecord> read_records(const fs::path& path, unsigned jobs) {
  return with_file_context(path, [&] { return ingest::read_function_changes(path, jobs); });
}

std::vector<LabeledFunction> read_labeled(const fs::path& path) {
  return with_file_context(path, [&] {
    std::vector<LabeledFunction> out;
    std::unordered_set<std::string> ids;
    for (const auto& line : jsonl::read_lines(path)) {
      try {
        out.push_back(json_io::labeled_function_from_json(jsonl::parse_line(line)));
      } catch (const Error& e) {
        if (e.line()) throw;
        throw Error(e.code(), e.subject(), line.number, "invalid labeled function");
      }
      if (!ids.insert(out.back().id).second) {
        throw Error(Errc::DuplicateRecordId, out.back().id, line.number);
      }
    }
    return out;
  });
}

DatasetSplit read_split(const fs::path& path) {
  return with_file_context(path, [&] {
    DatasetSplit split;
    for (const auto& line : jsonl::read_lines(path)) {
      const auto j = jsonl::parse_line(line);
      if (!j.is_object() || !j.contains("record_id") || !j["record_id"].is_string() ||
          !j.contains("split") || !j["split"].is_string()) {
        throw Error(Errc::SchemaViolation, "record_id/split", line.number);
      }
      auto s = parse_split(j["split"].get<std::string>());
      if (!s) throw Error(Errc::SchemaViolation, "split", line.number);
      if (!split.assignment.emplace(j["record_id"].get<std::string>(), *s).second) {
        throw Error(Errc::DuplicateRecordId, j["record_id"].get<std::string>(), line.number);
      }
    }
    return split;
  });
}

std::vector<FunctionPair> read_pairs(const fs::path& path) {
  return with_file_context(path, [&] {
    std::vector<FunctionPair> out;
    for (const auto& line : jsonl::read_lines(path)) {
      try {
        out.push_back(json_io::function_pair_from_json(jsonl::parse_line(line)));
      } catch (const Error& e) {
        if (e.line()) throw;
        throw Error(e.code(), e.subject(), line.number, "invalid pair");
      }
    }
    return out;
  });
}

void write_labeled(const fs::path& path, const std::vector<LabeledFunction>& corpus) {
  jsonl::write_jsonl(path, corpus, [](const LabeledFunction& f) { return json_io::to_json(f); });
}

Report to_json(const dedup::DedupReport& r) {
  return Report{{"kept", r.kept},
                {"dropped_unchanged", r.dropped_unchanged},
                {"dropped_duplicate", r.dropped_duplicate}};
}

Report to_json(const labeling::LabelReport& r) {
  return Report{{"commits_total", r.commits_total},
                {"commits_kept", r.commits_kept},
                {"commits_excluded", r.commits_excluded},
                {"one_func", r.one_func},
                {"nvd_check", r.nvd_check},
                {"both_labelers", r.both_labelers},
                {"vulnerable", r.vulnerable},
                {"benign_post_commit", r.benign_post_commit},
                {"benign_unchanged", r.benign_unchanged}};
}

Report to_json(const pairing::PairReport& r) {
  return Report{{"vulnerable", r.vulnerable},
                {"without_patch", r.without_patch},
                {"below_threshold", r.below_threshold},
                {"pairs", r.pairs},
                {"train", r.per_split[0]},
                {"dev", r.per_split[1]},
                {"test", r.per_split[2]}};
}

Report split_report(std::span<const LabeledFunction> labeled, const DatasetSplit& split) {
  const auto counts = splitting::count_splits(labeled, split);
  Report out{{"fractions", {split.fractions[0], split.fractions[1], split.fractions[2]}}};
  for (int s = 0; s < 3; ++s) {
    out[std::string(to_string(static_cast<SplitName>(s)))] =
        Report{{"commits", counts[s].commits},
               {"vulnerable", counts[s].vulnerable},
               {"benign", counts[s].benign}};
  }
  return out;
}

Report run_ingest(const Config& config) {
  ensure_workdir(config.workdir);
  auto records = read_records(config.input, config.jobs);
  const auto total = records.size();
  records = ingest::filter_sources(std::move(records), config.exclude_sources);

  jsonl::write_jsonl(config.workdir / files::kRecords, records,
                     [](const FunctionChangeRecord& r) { return json_io::to_json(r); });
  Report report{{"records", records.size()}, {"excluded_by_source", total - records.size()}};
  jsonl::write_json(config.workdir / files::kIngestReport, report);
  return report;
}

Report run_dedup(const Config& config) {
  auto records = read_records(config.workdir / files::kRecords, config.jobs);
  auto result = dedup::dedup_corpus(std::move(records), config.jobs);
  jsonl::write_jsonl(config.workdir / files::kDeduped, result.records,
                     [](const FunctionChangeRecord& r) { return json_io::to_json(r); });
  auto report = to_json(result.report);
  jsonl::write_json(config.workdir / files::kDedupReport, report);
  return report;
}

Report run_label(const Config& config) {
  const auto records = read_records(config.workdir / files::kDeduped, config.jobs);
  ingest::NvdFeed feed;
  if (!config.nvd.empty()) {
    feed = with_file_context(config.nvd, [&] { return ingest::read_nvd_feed(config.nvd); });
  }
  const auto linked = ingest::link_commits_to_cves(records, feed);
  auto result = labeling::label_corpus(linked, config.labeling, config.jobs);
  write_labeled(config.workdir / files::kLabeled, result.corpus);
  auto report = to_json(result.report);
  report["benign"] = result.report.benign_post_commit + result.report.benign_unchanged;
  report["labeled"] = result.corpus.size();
  jsonl::write_json(config.workdir / files::kLabelReport, report);
  return report;
}

Report run_split(const Config& config) {
  const auto labeled = read_labeled(config.workdir / files::kLabeled);
  const auto split = splitting::temporal_split(labeled, config.fractions);

  std::vector<std::string> manifest;
  std::vector<LabeledFunction> parts[3];
  manifest.reserve(labeled.size());
  for (const auto& f : labeled) {
    const auto s = *split.find(f.id);
    manifest.push_back(json_io::split_entry_to_json(f.id, s).dump());
    parts[static_cast<int>(s)].push_back(f);
  }
  jsonl::write_lines(config.workdir / files::kSplit, manifest);
  for (int s = 0; s < 3; ++s) {
    write_labeled(config.workdir / files::split_corpus(static_cast<SplitName>(s)), parts[s]);
  }
  auto report = split_report(labeled, split);
  jsonl::write_json(config.workdir / files::kSplitReport, report);
  return report;
}

Report run_pair(const Config& config) {
  const auto labeled = read_labeled(config.workdir / files::kLabeled);
  const auto split = read_split(config.workdir / files::kSplit);
  for (const auto& f : labeled) {
    if (!split.find(f.id)) {
      throw Error(Errc::SchemaViolation, f.id, std::nullopt, "labeled function missing from split")
          .with_file((config.workdir / files::kSplit).string());
    }
  }
  const auto result = pairing::build_pairs(labeled, split, config.similarity_threshold, config.jobs);
  jsonl::write_jsonl(config.workdir / files::kPairs, result.pairs,
                     [](const FunctionPair& p) { return json_io::to_json(p); });
  auto report = to_json(result.report);
  report["similarity_threshold"] = config.similarity_threshold;
  jsonl::write_json(config.workdir / files::kPairReport, report);
  return report;
}

Report run_all(const Config& config) {
  Report out;
  out["ingest"] = run_ingest(config);
  out["dedup"] = run_dedup(config);
  out["label"] = run_label(config);
  out["split"] = run_split(config);
  out["pair"] = run_pair(config);
  return out;
}

EvaluationResult run_evaluate(const Config& config, const fs::path& predictions, SplitName split) {
  const auto labeled = read_labeled(config.workdir / files::kLabeled);
  const auto assignment = read_split(config.workdir / files::kSplit);
  const auto preds = with_file_context(predictions, [&] {
    return evaluation::read_predictions(predictions);
  });

  std::vector<LabeledFunction> in_split;
  std::unordered_set<std::string_view> known;
  for (const auto& f : labeled) {
    known.insert(f.id);
    if (assignment.find(f.id) == split) in_split.push_back(f);
  }
  for (const auto& [id, _] : preds) {
    if (!known.contains(id)) {
      throw Error(Errc::UnknownRecord, id).with_file(predictions.string());
    }
  }

  EvaluationResult result;
  result.split = split;
  result.metrics = evaluation::evaluate(preds, in_split, config.eval);

  std::vector<FunctionPair> pairs;
  const auto pairs_path = config.workdir / files::kPairs;
  if (fs::exists(pairs_path)) {
    for (auto& p : read_pairs(pairs_path)) {
      if (assignment.find(p.vulnerable_id) == split) pairs.push_back(std::move(p));
    }
  }
  result.pairs = evaluation::pairwise_eval(pairs, preds, config.eval.binary_threshold);
  return result;
}

Report to_json(const EvaluationResult& result) {
  return Report{{"split", to_string(result.split)},
                {"metrics", json_io::to_json(result.metrics)},
                {"pairs", json_io::to_json(result.pairs)}};
}

}  // namespace vulncur::pipeline
