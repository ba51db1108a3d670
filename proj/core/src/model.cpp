#include "vulncur/model.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <stdexcept>
#include <tuple>

namespace vulncur {

std::string make_record_id(std::string_view source_dataset, std::string_view commit_hash,
                           std::string_view file_path, std::string_view function_name) {
  std::string id;
  id.reserve(source_dataset.size() + commit_hash.size() + file_path.size() +
             function_name.size() + 3);
  id.append(source_dataset).append(":").append(commit_hash).append(":");
  id.append(file_path).append(":").append(function_name);
  return id;
}

bool canonical_less(const FunctionChangeRecord& a, const FunctionChangeRecord& b) {
  return std::tie(a.commit_date, a.commit_hash, a.file_path, a.function_name, a.record_id) <
         std::tie(b.commit_date, b.commit_hash, b.file_path, b.function_name, b.record_id);
}

bool is_valid_cve_id(std::string_view id) {
  static const std::regex pattern(R"(CVE-[0-9]{4}-[0-9]{4,})");
  return std::regex_match(id.begin(), id.end(), pattern);
}

bool is_hex(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
  });
}

NormalizedDigest::NormalizedDigest(std::string hex) : hex_(std::move(hex)) {
  const bool ok = hex_.size() == 32 && std::all_of(hex_.begin(), hex_.end(), [](char c) {
                    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                  });
  if (!ok) throw std::invalid_argument("digest must be 32 lowercase hex characters: " + hex_);
}

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 2> kVersionNames = {"pre_commit", "post_commit"};
constexpr std::array<std::string_view, 2> kLabelNames = {"vulnerable", "benign"};
constexpr std::array<std::string_view, 4> kLabelerNames = {"OneFunc", "NVDCheck",
                                                           "PostCommitBenign", "UnchangedBenign"};
constexpr std::array<std::string_view, 3> kSplitNames = {"train", "dev", "test"};
constexpr std::array<std::string_view, 4> kOutcomeNames = {"P-C", "P-V", "P-B", "P-R"};
constexpr std::array<std::string_view, 3> kVerdictNames = {"vulnerable", "not_vulnerable",
                                                           "unsure"};
constexpr std::array<std::string_view, 4> kCategoryNames = {
    "Correct", "MultiFunctionSpread", "RelevantConsistency", "Irrelevant"};
constexpr std::array<std::string_view, 2> kStatusNames = {"resolved", "needs_discussion"};

}  // namespace

std::string_view to_string(Version v) { return kVersionNames[static_cast<int>(v)]; }
std::string_view to_string(Label l) { return kLabelNames[static_cast<int>(l)]; }
std::string_view to_string(Labeler l) { return kLabelerNames[static_cast<int>(l)]; }
std::string_view to_string(SplitName s) { return kSplitNames[static_cast<int>(s)]; }
std::string_view to_string(PairOutcome o) { return kOutcomeNames[static_cast<int>(o)]; }
std::string_view to_string(Verdict v) { return kVerdictNames[static_cast<int>(v)]; }
std::string_view to_string(ErrorCategory c) { return kCategoryNames[static_cast<int>(c)]; }
std::string_view to_string(ResolutionStatus s) { return kStatusNames[static_cast<int>(s)]; }

std::optional<Version> parse_version(std::string_view s) {
  return parse_enum<Version>(s, kVersionNames);
}
std::optional<Label> parse_label(std::string_view s) { return parse_enum<Label>(s, kLabelNames); }
std::optional<Labeler> parse_labeler(std::string_view s) {
  return parse_enum<Labeler>(s, kLabelerNames);
}
std::optional<SplitName> parse_split(std::string_view s) {
  return parse_enum<SplitName>(s, kSplitNames);
}
std::optional<Verdict> parse_verdict(std::string_view s) {
  return parse_enum<Verdict>(s, kVerdictNames);
}
std::optional<ErrorCategory> parse_error_category(std::string_view s) {
  return parse_enum<ErrorCategory>(s, kCategoryNames);
}

bool LabeledFunction::has_labeler(Labeler l) const {
  return std::find(labelers.begin(), labelers.end(), l) != labelers.end();
}

std::string labeled_id(std::string_view record_id, Version version) {
  std::string id(record_id);
  id += version == Version::PreCommit ? "#pre" : "#post";
  return id;
}

std::optional<SplitName> DatasetSplit::find(const std::string& id) const {
  auto it = assignment.find(id);
  if (it == assignment.end()) return std::nullopt;
  return it->second;
}

bool DatasetSplit::operator==(const DatasetSplit& other) const {
  return assignment == other.assignment &&
         std::equal(std::begin(fractions), std::end(fractions), std::begin(other.fractions));
}

}  // namespace vulncur
