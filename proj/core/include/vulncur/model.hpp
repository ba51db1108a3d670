#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vulncur {

/// UTC seconds since the epoch.
using Timestamp = std::int64_t;

/// One function as changed (or left untouched) by one commit.
struct FunctionChangeRecord {
  std::string record_id;
  std::string project;
  std::string commit_hash;
  Timestamp commit_date = 0;
  std::string commit_message;
  std::optional<std::string> cve_id;
  std::vector<std::string> cwe_ids;
  std::string file_path;
  std::string function_name;
  std::optional<std::string> code_before;
  std::optional<std::string> code_after;
  bool changed = true;
  std::string source_dataset;

  bool operator==(const FunctionChangeRecord&) const = default;
};

/// `<source_dataset>:<commit_hash>:<file_path>:<function_name>`
std::string make_record_id(std::string_view source_dataset, std::string_view commit_hash,
                           std::string_view file_path, std::string_view function_name);

/// Orders records by (commit_date, commit_hash, file_path, function_name, record_id).
bool canonical_less(const FunctionChangeRecord& a, const FunctionChangeRecord& b);

bool is_valid_cve_id(std::string_view id);
bool is_hex(std::string_view s);

struct NvdEntry {
  std::string cve_id;
  std::string description;
  std::optional<Timestamp> published;

  bool operator==(const NvdEntry&) const = default;
};

/// Lowercase hex MD5 of whitespace-normalized source text.
class NormalizedDigest {
 public:
  NormalizedDigest() = default;
  /// Throws std::invalid_argument unless `hex` is 32 lowercase hex characters.
  explicit NormalizedDigest(std::string hex);

  const std::string& hex() const noexcept { return hex_; }
  bool empty() const noexcept { return hex_.empty(); }

  auto operator<=>(const NormalizedDigest&) const = default;

 private:
  std::string hex_;
};

enum class Version { PreCommit, PostCommit };
enum class Label { Vulnerable, Benign };
enum class Labeler { OneFunc, NVDCheck, PostCommitBenign, UnchangedBenign };
enum class SplitName { Train, Dev, Test };

std::string_view to_string(Version v);
std::string_view to_string(Label l);
std::string_view to_string(Labeler l);
std::string_view to_string(SplitName s);
std::optional<Version> parse_version(std::string_view s);
std::optional<Label> parse_label(std::string_view s);
std::optional<Labeler> parse_labeler(std::string_view s);
std::optional<SplitName> parse_split(std::string_view s);

/// A function version carrying a vulnerable/benign label.
///
/// `id` identifies the version (`<record_id>#pre` or `<record_id>#post`); it is
/// the key used by split manifests, prediction files and pair manifests,
/// because one change record can yield both a vulnerable and a benign sample.
/// `labelers` is sorted and non-empty; it holds more than one entry only when
/// several vulnerable labelers hit the same function.
struct LabeledFunction {
  std::string id;
  std::string record_id;
  Version version = Version::PreCommit;
  std::string code;
  Label label = Label::Benign;
  std::vector<Labeler> labelers;
  NormalizedDigest digest;
  std::string commit_hash;
  Timestamp commit_date = 0;
  std::optional<std::string> cve_id;
  std::vector<std::string> cwe_ids;

  Labeler labeler() const { return labelers.front(); }
  bool has_labeler(Labeler l) const;
  bool is_vulnerable() const noexcept { return label == Label::Vulnerable; }

  bool operator==(const LabeledFunction&) const = default;
};

std::string labeled_id(std::string_view record_id, Version version);

/// Total assignment of labeled function ids to train/dev/test.
struct DatasetSplit {
  std::map<std::string, SplitName> assignment;
  double fractions[3] = {0.8, 0.1, 0.1};

  std::optional<SplitName> find(const std::string& id) const;
  bool operator==(const DatasetSplit& other) const;
};

struct FunctionPair {
  std::string vulnerable_id;
  std::string benign_id;
  double similarity = 0.0;

  bool operator==(const FunctionPair&) const = default;
};

struct PredictionRecord {
  std::string record_id;
  double score = 0.0;

  bool operator==(const PredictionRecord&) const = default;
};

struct EvalConfig {
  double fpr_tolerance = 0.005;
  double binary_threshold = 0.5;
};

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct EvalReport {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double vd_s = 0.0;
  double vd_s_threshold = 0.0;
  double fpr_tolerance = 0.0;
  double binary_threshold = 0.0;
};

enum class PairOutcome { Correct, BothVulnerable, BothBenign, Reversed };
std::string_view to_string(PairOutcome o);  // "P-C", "P-V", "P-B", "P-R"

struct PairOutcomeReport {
  std::int64_t total_pairs = 0;
  std::int64_t counts[4] = {0, 0, 0, 0};
  double percentages[4] = {0, 0, 0, 0};  // rounded to 2 decimals

  std::int64_t count(PairOutcome o) const { return counts[static_cast<int>(o)]; }
  double percentage(PairOutcome o) const { return percentages[static_cast<int>(o)]; }
};

enum class Verdict { Vulnerable, NotVulnerable, Unsure };
enum class ErrorCategory { Correct, MultiFunctionSpread, RelevantConsistency, Irrelevant };
enum class ResolutionStatus { Resolved, NeedsDiscussion };

std::string_view to_string(Verdict v);
std::string_view to_string(ErrorCategory c);
std::string_view to_string(ResolutionStatus s);
std::optional<Verdict> parse_verdict(std::string_view s);
std::optional<ErrorCategory> parse_error_category(std::string_view s);

struct AuditSample {
  std::string sample_id;
  std::string record_id;  // labeled function id of the sampled vulnerable version
  std::uint64_t seed = 0;
  std::string project;
  std::string file_path;
  std::string function_name;
  std::vector<Labeler> labelers;
  std::string commit_hash;
  std::string commit_message;
  std::optional<std::string> code_before;
  std::optional<std::string> code_after;
  std::optional<std::string> cve_id;
  std::optional<std::string> nvd_description;

  bool operator==(const AuditSample&) const = default;
};

struct AnnotatorVote {
  std::string sample_id;
  std::string annotator_id;
  Verdict verdict = Verdict::Unsure;
  ErrorCategory category = ErrorCategory::Correct;

  bool operator==(const AnnotatorVote&) const = default;
};

struct AuditResolution {
  std::string sample_id;
  std::optional<Verdict> final_label;
  ResolutionStatus status = ResolutionStatus::NeedsDiscussion;
  ErrorCategory category = ErrorCategory::Correct;

  bool operator==(const AuditResolution&) const = default;
};

}  // namespace vulncur
