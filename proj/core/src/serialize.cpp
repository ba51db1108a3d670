#include "vulncur/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "vulncur/dedup.hpp"
#include "vulncur/error.hpp"

namespace vulncur::json_io {

namespace {

[[noreturn]] void violation(std::string field, std::string detail = {}) {
  throw Error(Errc::SchemaViolation, std::move(field), std::nullopt, std::move(detail));
}

/// Typed field access over one JSON object, rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::initializer_list<std::string_view> allowed) : j_(j) {
    if (!j.is_object()) violation("<root>", "expected a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        violation(key, "unknown field");
      }
    }
  }

  const json& required(const char* field) const {
    auto it = j_.find(field);
    if (it == j_.end()) violation(field, "missing");
    return *it;
  }

  std::string string(const char* field) const {
    const json& v = required(field);
    if (!v.is_string()) violation(field, "expected string");
    return v.get<std::string>();
  }

  std::string non_empty_string(const char* field) const {
    auto s = string(field);
    if (s.empty()) violation(field, "must be non-empty");
    return s;
  }

  std::optional<std::string> optional_string(const char* field, bool must_exist = true) const {
    auto it = j_.find(field);
    if (it == j_.end()) {
      if (must_exist) violation(field, "missing");
      return std::nullopt;
    }
    if (it->is_null()) return std::nullopt;
    if (!it->is_string()) violation(field, "expected string or null");
    return it->get<std::string>();
  }

  std::int64_t integer(const char* field) const {
    const json& v = required(field);
    if (!v.is_number_integer()) violation(field, "expected integer");
    return v.get<std::int64_t>();
  }

  std::optional<std::int64_t> optional_integer(const char* field) const {
    auto it = j_.find(field);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) violation(field, "expected integer or null");
    return it->get<std::int64_t>();
  }

  double number(const char* field) const {
    const json& v = required(field);
    if (!v.is_number()) violation(field, "expected number");
    return v.get<double>();
  }

  bool boolean(const char* field) const {
    const json& v = required(field);
    if (!v.is_boolean()) violation(field, "expected boolean");
    return v.get<bool>();
  }

  std::vector<std::string> string_array(const char* field) const {
    const json& v = required(field);
    if (!v.is_array()) violation(field, "expected array of strings");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& e : v) {
      if (!e.is_string()) violation(field, "expected array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  template <typename Enum>
  Enum enumeration(const char* field, std::optional<Enum> (*parse)(std::string_view)) const {
    auto s = string(field);
    auto v = parse(s);
    if (!v) violation(field, "unrecognized value '" + s + "'");
    return *v;
  }

  bool has(const char* field) const { return j_.contains(field); }

 private:
  const json& j_;
};

ordered_json nullable(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

ordered_json labeler_array(const std::vector<Labeler>& labelers) {
  ordered_json out = ordered_json::array();
  for (auto l : labelers) out.push_back(to_string(l));
  return out;
}

}  // namespace

double round_to(double value, int places) {
  const double scale = std::pow(10.0, places);
  return std::round(value * scale) / scale;
}

ordered_json to_json(const FunctionChangeRecord& r) {
  return ordered_json{{"record_id", r.record_id},
                      {"project", r.project},
                      {"commit_hash", r.commit_hash},
                      {"commit_date", r.commit_date},
                      {"commit_message", r.commit_message},
                      {"cve_id", nullable(r.cve_id)},
                      {"cwe_ids", r.cwe_ids},
                      {"file_path", r.file_path},
                      {"function_name", r.function_name},
                      {"code_before", nullable(r.code_before)},
                      {"code_after", nullable(r.code_after)},
                      {"changed", r.changed},
                      {"source_dataset", r.source_dataset}};
}

FunctionChangeRecord change_record_from_json(const json& j) {
  ObjectReader in(j, {"record_id", "project", "commit_hash", "commit_date", "commit_message",
                      "cve_id", "cwe_ids", "file_path", "function_name", "code_before",
                      "code_after", "changed", "source_dataset"});
  FunctionChangeRecord r;
  r.record_id = in.non_empty_string("record_id");
  r.project = in.string("project");
  r.commit_hash = in.non_empty_string("commit_hash");
  if (!is_hex(r.commit_hash)) violation("commit_hash", "expected hex string");
  r.commit_date = in.integer("commit_date");
  r.commit_message = in.string("commit_message");
  r.cve_id = in.optional_string("cve_id");
  if (r.cve_id && !is_valid_cve_id(*r.cve_id)) violation("cve_id", "not a CVE identifier");
  r.cwe_ids = in.string_array("cwe_ids");
  r.file_path = in.string("file_path");
  r.function_name = in.string("function_name");
  r.code_before = in.optional_string("code_before");
  r.code_after = in.optional_string("code_after");
  r.changed = in.boolean("changed");
  r.source_dataset = in.string("source_dataset");
  if (!r.code_before && !r.code_after) violation("code_before", "both code versions are null");
  if (!r.changed && r.code_before != r.code_after) {
    violation("changed", "changed=false but code_before differs from code_after");
  }
  return r;
}

ordered_json to_json(const NvdEntry& e) {
  return ordered_json{{"cve_id", e.cve_id},
                      {"description", e.description},
                      {"published", e.published ? ordered_json(*e.published)
                                                : ordered_json(nullptr)}};
}

NvdEntry nvd_entry_from_json(const json& j) {
  ObjectReader in(j, {"cve_id", "description", "published"});
  NvdEntry e;
  e.cve_id = in.string("cve_id");
  if (!is_valid_cve_id(e.cve_id)) violation("cve_id", "not a CVE identifier");
  e.description = in.string("description");
  e.published = in.optional_integer("published");
  return e;
}

ordered_json to_json(const LabeledFunction& f) {
  return ordered_json{{"id", f.id},
                      {"record_id", f.record_id},
                      {"version", to_string(f.version)},
                      {"code", f.code},
                      {"label", to_string(f.label)},
                      {"labeler", to_string(f.labeler())},
                      {"provenance", labeler_array(f.labelers)},
                      {"digest", f.digest.hex()},
                      {"commit_hash", f.commit_hash},
                      {"commit_date", f.commit_date},
                      {"cve_id", nullable(f.cve_id)},
                      {"cwe_ids", f.cwe_ids}};
}

LabeledFunction labeled_function_from_json(const json& j) {
  ObjectReader in(j, {"id", "record_id", "version", "code", "label", "labeler", "provenance",
                      "digest", "commit_hash", "commit_date", "cve_id", "cwe_ids"});
  LabeledFunction f;
  f.id = in.non_empty_string("id");
  f.record_id = in.non_empty_string("record_id");
  f.version = in.enumeration<Version>("version", parse_version);
  f.code = in.string("code");
  f.label = in.enumeration<Label>("label", parse_label);
  const Labeler primary = in.enumeration<Labeler>("labeler", parse_labeler);
  if (in.has("provenance")) {
    for (const auto& name : in.string_array("provenance")) {
      auto l = parse_labeler(name);
      if (!l) violation("provenance", "unrecognized labeler '" + name + "'");
      f.labelers.push_back(*l);
    }
    std::sort(f.labelers.begin(), f.labelers.end());
    f.labelers.erase(std::unique(f.labelers.begin(), f.labelers.end()), f.labelers.end());
    if (f.labelers.empty() || f.labelers.front() != primary) {
      violation("provenance", "must start with the primary labeler");
    }
  } else {
    f.labelers = {primary};
  }
  try {
    f.digest = NormalizedDigest(in.string("digest"));
  } catch (const std::invalid_argument&) {
    violation("digest", "expected 32 lowercase hex characters");
  }
  f.commit_hash = in.non_empty_string("commit_hash");
  f.commit_date = in.integer("commit_date");
  f.cve_id = in.optional_string("cve_id", /*must_exist=*/false);
  f.cwe_ids = in.has("cwe_ids") ? in.string_array("cwe_ids") : std::vector<std::string>{};

  const bool vulnerable_labeler =
      std::all_of(f.labelers.begin(), f.labelers.end(),
                  [](Labeler l) { return l == Labeler::OneFunc || l == Labeler::NVDCheck; });
  if (f.label == Label::Vulnerable &&
      (!vulnerable_labeler || f.version != Version::PreCommit)) {
    violation("label", "vulnerable labels require a pre_commit version and OneFunc/NVDCheck");
  }
  if (f.label == Label::Benign && (vulnerable_labeler || f.labelers.size() != 1)) {
    violation("labeler", "benign labels require exactly one benign labeler");
  }
  if (f.has_labeler(Labeler::PostCommitBenign) && f.version != Version::PostCommit) {
    violation("version", "PostCommitBenign requires post_commit");
  }
  if (dedup::digest(f.code) != f.digest) violation("digest", "does not match code");
  return f;
}

ordered_json split_entry_to_json(const std::string& id, SplitName split) {
  return ordered_json{{"record_id", id}, {"split", to_string(split)}};
}

ordered_json to_json(const FunctionPair& p) {
  return ordered_json{{"vulnerable_id", p.vulnerable_id},
                      {"benign_id", p.benign_id},
                      {"similarity", p.similarity}};
}

FunctionPair function_pair_from_json(const json& j) {
  ObjectReader in(j, {"vulnerable_id", "benign_id", "similarity"});
  FunctionPair p;
  p.vulnerable_id = in.non_empty_string("vulnerable_id");
  p.benign_id = in.non_empty_string("benign_id");
  p.similarity = in.number("similarity");
  if (!(p.similarity >= 0.0 && p.similarity <= 1.0)) violation("similarity", "outside [0,1]");
  return p;
}

ordered_json to_json(const PredictionRecord& p) {
  return ordered_json{{"record_id", p.record_id}, {"score", p.score}};
}

PredictionRecord prediction_from_json(const json& j) {
  ObjectReader in(j, {"record_id", "score"});
  PredictionRecord p;
  p.record_id = in.non_empty_string("record_id");
  p.score = in.number("score");
  if (!(p.score >= 0.0 && p.score <= 1.0)) violation("score", "outside [0,1]");
  return p;
}

ordered_json to_json(const EvalReport& r) {
  return ordered_json{{"tp", r.counts.tp},
                      {"fp", r.counts.fp},
                      {"tn", r.counts.tn},
                      {"fn", r.counts.fn},
                      {"accuracy", r.accuracy},
                      {"f1", r.f1},
                      {"precision", r.precision},
                      {"recall", r.recall},
                      {"fpr", r.fpr},
                      {"fnr", r.fnr},
                      {"vd_s", r.vd_s},
                      {"vd_s_threshold", r.vd_s_threshold},
                      {"fpr_tolerance", r.fpr_tolerance},
                      {"binary_threshold", r.binary_threshold}};
}

ordered_json to_json(const PairOutcomeReport& r) {
  ordered_json out{{"total_pairs", r.total_pairs}};
  for (int i = 0; i < 4; ++i) {
    const auto name = std::string(to_string(static_cast<PairOutcome>(i)));
    out[name] = ordered_json{{"count", r.counts[i]}, {"percent", r.percentages[i]}};
  }
  return out;
}

ordered_json to_json(const AuditSample& s) {
  return ordered_json{{"sample_id", s.sample_id},
                      {"record_id", s.record_id},
                      {"seed", s.seed},
                      {"project", s.project},
                      {"file_path", s.file_path},
                      {"function_name", s.function_name},
                      {"labelers", labeler_array(s.labelers)},
                      {"commit_hash", s.commit_hash},
                      {"commit_message", s.commit_message},
                      {"code_before", nullable(s.code_before)},
                      {"code_after", nullable(s.code_after)},
                      {"cve_id", nullable(s.cve_id)},
                      {"nvd_description", nullable(s.nvd_description)}};
}

AuditSample audit_sample_from_json(const json& j) {
  ObjectReader in(j, {"sample_id", "record_id", "seed", "project", "file_path", "function_name",
                      "labelers", "commit_hash", "commit_message", "code_before", "code_after",
                      "cve_id", "nvd_description"});
  AuditSample s;
  s.sample_id = in.non_empty_string("sample_id");
  s.record_id = in.non_empty_string("record_id");
  const json& seed = in.required("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    violation("seed", "expected non-negative integer");
  }
  s.seed = seed.get<std::uint64_t>();
  s.project = in.string("project");
  s.file_path = in.string("file_path");
  s.function_name = in.string("function_name");
  for (const auto& name : in.string_array("labelers")) {
    auto l = parse_labeler(name);
    if (!l) violation("labelers", "unrecognized labeler '" + name + "'");
    s.labelers.push_back(*l);
  }
  s.commit_hash = in.string("commit_hash");
  s.commit_message = in.string("commit_message");
  s.code_before = in.optional_string("code_before");
  s.code_after = in.optional_string("code_after");
  s.cve_id = in.optional_string("cve_id");
  s.nvd_description = in.optional_string("nvd_description");
  return s;
}

ordered_json to_json(const AnnotatorVote& v) {
  return ordered_json{{"sample_id", v.sample_id},
                      {"annotator_id", v.annotator_id},
                      {"verdict", to_string(v.verdict)},
                      {"category", to_string(v.category)}};
}

AnnotatorVote annotator_vote_from_json(const json& j) {
  ObjectReader in(j, {"sample_id", "annotator_id", "verdict", "category"});
  AnnotatorVote v;
  v.sample_id = in.non_empty_string("sample_id");
  v.annotator_id = in.non_empty_string("annotator_id");
  v.verdict = in.enumeration<Verdict>("verdict", parse_verdict);
  if (in.has("category") && !in.required("category").is_null()) {
    v.category = in.enumeration<ErrorCategory>("category", parse_error_category);
  }
  return v;
}

ordered_json to_json(const AuditResolution& r) {
  return ordered_json{
      {"sample_id", r.sample_id},
      {"final_label", r.final_label ? ordered_json(to_string(*r.final_label))
                                    : ordered_json(nullptr)},
      {"status", to_string(r.status)},
      {"category", to_string(r.category)}};
}

}  // namespace vulncur::json_io
