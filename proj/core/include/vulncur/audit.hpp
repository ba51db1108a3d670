#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vulncur/ingest.hpp"
#include "vulncur/model.hpp"

namespace vulncur::audit {

/// `n` distinct indices in [0, population), in draw order. Partial
/// Fisher-Yates over mt19937_64 with rejection sampling, so the result is
/// the same on every standard library.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed);

/// Uniform sample without replacement of `n` vulnerable functions (optionally
/// restricted to those carrying `labeler`), each bundled with the context an
/// annotator reviews. `records` supplies the original change records and
/// `feed` the NVD descriptions. Raises InsufficientPopulation.
std::vector<AuditSample> draw_sample(std::span<const LabeledFunction> labeled,
                                     std::span<const FunctionChangeRecord> records,
                                     const ingest::NvdFeed& feed, std::size_t n,
                                     std::uint64_t seed,
                                     std::optional<Labeler> labeler = std::nullopt);

/// Vulnerable votes carry category Correct; not_vulnerable votes carry one of
/// the three error categories. Raises InvalidArgument otherwise.
void validate_vote(const AnnotatorVote& vote);

/// Strict majority of `panel_size` (2 of 3 by default). Fewer votes than the
/// panel, or any unsure vote, leaves the sample in discussion.
AuditResolution resolve_majority(const std::string& sample_id, std::span<const AnnotatorVote> votes,
                                 std::size_t panel_size = 3);

struct CategoryShare {
  std::size_t count = 0;
  double percent = 0.0;
};

struct AccuracyReport {
  std::size_t samples = 0;
  std::size_t correct = 0;
  double correct_pct = 0.0;
  /// Over the three error categories; percentages are over all samples.
  std::map<ErrorCategory, CategoryShare> breakdown;
};

/// Raises UnresolvedSamples when any resolution is still in discussion.
AccuracyReport accuracy_report(std::span<const AuditResolution> resolutions);

/// One-decimal percentage, e.g. "92.0".
std::string format_percent(double pct);
std::string format_report(const AccuracyReport& report);
nlohmann::ordered_json to_json(const AccuracyReport& report);

struct AuditOptions {
  std::size_t panel_size = 3;
};

/// Audit state rebuilt from, and persisted to, an append-only JSONL event
/// log. Events: {"event":"sample","sample":{...}}, {"event":"vote","vote":{...}}
/// and {"event":"revision","vote":{...}}. Resolution uses the latest vote of
/// each annotator. Thread-safe; mutations are serialized.
class AuditStore {
 public:
  /// In-memory store without a log.
  explicit AuditStore(std::vector<AuditSample> samples, AuditOptions options = {});

  /// Writes a fresh log holding `samples`. Raises Io if `log` already exists.
  static std::unique_ptr<AuditStore> create(const std::filesystem::path& log,
                                            std::vector<AuditSample> samples,
                                            AuditOptions options = {});

  /// Replays an existing log.
  static std::unique_ptr<AuditStore> open(const std::filesystem::path& log,
                                          AuditOptions options = {});

  AuditStore(const AuditStore&) = delete;
  AuditStore& operator=(const AuditStore&) = delete;

  std::size_t panel_size() const noexcept { return options_.panel_size; }

  std::vector<AuditSample> samples() const;
  std::optional<AuditSample> find(const std::string& sample_id) const;

  /// First sample (in draw order) the annotator has not voted on.
  std::optional<AuditSample> next_pending(const std::string& annotator_id) const;

  /// Raises UnknownSample, DuplicateVote or InvalidArgument; Io when the log
  /// cannot be appended (state is left unchanged).
  void record_vote(const AnnotatorVote& vote);

  /// Replaces the annotator's vote after a discussion. Raises UnknownSample or
  /// UnknownVote when the annotator has not voted yet.
  void revise_vote(const AnnotatorVote& vote);

  std::vector<AnnotatorVote> votes(const std::string& sample_id) const;
  AuditResolution resolution(const std::string& sample_id) const;
  std::vector<AuditResolution> resolutions() const;
  AccuracyReport report() const;

 private:
  AuditStore(AuditOptions options, std::filesystem::path log);

  void append_event(const nlohmann::ordered_json& event);
  std::vector<AnnotatorVote>::iterator check_vote(const AnnotatorVote& vote, bool revision);
  void apply_vote(const AnnotatorVote& vote, bool revision);
  AuditResolution resolution_locked(const std::string& sample_id) const;

  AuditOptions options_;
  std::optional<std::filesystem::path> log_path_;
  std::ofstream log_;

  mutable std::shared_mutex mu_;
  std::vector<AuditSample> samples_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<AnnotatorVote>> votes_;
};

}  // namespace vulncur::audit
