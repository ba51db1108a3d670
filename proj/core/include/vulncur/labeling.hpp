#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vulncur/ingest.hpp"
#include "vulncur/model.hpp"

namespace vulncur::labeling {

/// How an NVD description is matched against changed functions.
struct NvdMatchOptions {
  bool match_function_names = true;
  bool match_file_names = true;
  /// Names shorter than this never match by name ("add", "get", ...).
  std::size_t min_function_name_length = 4;
};

struct LabelingOptions {
  bool one_func = true;
  bool nvd_check = true;
  NvdMatchOptions nvd;
};

/// Case-sensitive match of `name` not adjacent to [A-Za-z0-9_].
bool mentions_identifier(std::string_view text, std::string_view name);

/// Whether `text` cites the file, either by basename or by full path. A
/// match must not be adjacent to [A-Za-z0-9_./-], except that a single
/// sentence-ending '.' may follow it.
bool mentions_file(std::string_view text, std::string_view file_path);

/// Pre-commit version of the only changed record of the commit, if it has one.
std::vector<LabeledFunction> label_one_func(const ingest::CommitGroup& group);

/// Pre-commit versions of changed records that the description names
/// directly, or whose file it names while they are the only changed record
/// in that file.
std::vector<LabeledFunction> label_nvd_check(const ingest::CommitGroup& group, const NvdEntry& nvd,
                                             const NvdMatchOptions& options = {});

/// Union keyed by digest; a function hit by both labelers keeps one entry
/// with both labelers in its provenance. Order: first occurrence in a, then b.
std::vector<LabeledFunction> merge_vulnerable_labels(std::vector<LabeledFunction> a,
                                                     std::vector<LabeledFunction> b);

/// Benign labels for one commit that has at least one vulnerable function:
/// the post-commit version of each vulnerable function and every unchanged
/// function. Versions whose digest is already in `labeled_digests` are
/// skipped; emitted digests are added to it.
std::vector<LabeledFunction> label_benign(const ingest::CommitGroup& group,
                                          const std::vector<LabeledFunction>& vulnerable,
                                          std::unordered_set<std::string>& labeled_digests);

struct Exclusion {
  std::vector<ingest::LinkedCommit> kept;
  std::size_t excluded = 0;
};

/// Removes commits that received no vulnerable label.
Exclusion exclude_unmatched_commits(std::vector<ingest::LinkedCommit> commits,
                                    const std::vector<LabeledFunction>& vulnerable);

struct LabelReport {
  std::size_t commits_total = 0;
  std::size_t commits_kept = 0;
  std::size_t commits_excluded = 0;
  std::size_t one_func = 0;
  std::size_t nvd_check = 0;
  std::size_t both_labelers = 0;
  std::size_t vulnerable = 0;
  std::size_t benign_post_commit = 0;
  std::size_t benign_unchanged = 0;

  bool operator==(const LabelReport&) const = default;
};

struct LabelingResult {
  /// Per kept commit: its vulnerable functions, then its benign functions,
  /// each in canonical record order.
  std::vector<LabeledFunction> corpus;
  LabelReport report;
};

/// Runs both labelers, merges, excludes unmatched commits and labels benign
/// functions. Per-commit labeling uses `jobs` threads.
LabelingResult label_corpus(const std::vector<ingest::LinkedCommit>& commits,
                            const LabelingOptions& options = {}, unsigned jobs = 1);

/// Builds a labeled version of `record`.
LabeledFunction make_labeled(const FunctionChangeRecord& record, Version version, Label label,
                             Labeler labeler);

}  // namespace vulncur::labeling
