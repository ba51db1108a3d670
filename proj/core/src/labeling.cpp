#include "vulncur/labeling.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "vulncur/dedup.hpp"
#include "vulncur/parallel.hpp"

namespace vulncur::labeling {

namespace {

constexpr bool is_identifier_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

constexpr bool is_path_char(char c) {
  return is_identifier_char(c) || c == '.' || c == '/' || c == '-';
}

constexpr bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool mentions_path(std::string_view text, std::string_view needle) {
  if (needle.empty()) return false;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + 1)) {
    if (pos > 0 && is_path_char(text[pos - 1])) continue;
    const std::size_t end = pos + needle.size();
    if (end == text.size() || !is_path_char(text[end])) return true;
    // "... in pngread.c." or "... in pngread.c.\n"
    if (text[end] == '.' && (end + 1 == text.size() || is_space(text[end + 1]))) return true;
  }
  return false;
}

std::string_view basename(std::string_view path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

}  // namespace

bool mentions_identifier(std::string_view text, std::string_view name) {
  if (name.empty()) return false;
  for (std::size_t pos = text.find(name); pos != std::string_view::npos;
       pos = text.find(name, pos + 1)) {
    const bool left_ok = pos == 0 || !is_identifier_char(text[pos - 1]);
    const std::size_t end = pos + name.size();
    const bool right_ok = end == text.size() || !is_identifier_char(text[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

bool mentions_file(std::string_view text, std::string_view file_path) {
  const auto base = basename(file_path);
  return mentions_path(text, base) || (base != file_path && mentions_path(text, file_path));
}

LabeledFunction make_labeled(const FunctionChangeRecord& record, Version version, Label label,
                             Labeler labeler) {
  LabeledFunction f;
  f.id = labeled_id(record.record_id, version);
  f.record_id = record.record_id;
  f.version = version;
  f.code = version == Version::PreCommit ? *record.code_before : *record.code_after;
  f.label = label;
  f.labelers = {labeler};
  f.digest = dedup::digest(f.code);
  f.commit_hash = record.commit_hash;
  f.commit_date = record.commit_date;
  f.cve_id = record.cve_id;
  f.cwe_ids = record.cwe_ids;
  return f;
}

std::vector<LabeledFunction> label_one_func(const ingest::CommitGroup& group) {
  const FunctionChangeRecord* only = nullptr;
  for (const auto& r : group.records) {
    if (!r.changed) continue;
    if (only) return {};
    only = &r;
  }
  if (!only || !only->code_before) return {};
  return {make_labeled(*only, Version::PreCommit, Label::Vulnerable, Labeler::OneFunc)};
}

std::vector<LabeledFunction> label_nvd_check(const ingest::CommitGroup& group, const NvdEntry& nvd,
                                             const NvdMatchOptions& options) {
  std::map<std::string_view, std::size_t> changed_per_file;
  for (const auto& r : group.records) {
    if (r.changed) ++changed_per_file[r.file_path];
  }

  std::vector<LabeledFunction> out;
  for (const auto& r : group.records) {
    if (!r.changed || !r.code_before) continue;
    const bool by_name = options.match_function_names &&
                         r.function_name.size() >= options.min_function_name_length &&
                         mentions_identifier(nvd.description, r.function_name);
    const bool by_file = options.match_file_names && changed_per_file[r.file_path] == 1 &&
                         mentions_file(nvd.description, r.file_path);
    if (by_name || by_file) {
      out.push_back(make_labeled(r, Version::PreCommit, Label::Vulnerable, Labeler::NVDCheck));
    }
  }
  return out;
}

std::vector<LabeledFunction> merge_vulnerable_labels(std::vector<LabeledFunction> a,
                                                     std::vector<LabeledFunction> b) {
  std::vector<LabeledFunction> merged;
  merged.reserve(a.size() + b.size());
  std::unordered_map<std::string, std::size_t> by_digest;
  auto absorb = [&](LabeledFunction&& f) {
    auto [it, inserted] = by_digest.try_emplace(f.digest.hex(), merged.size());
    if (inserted) {
      merged.push_back(std::move(f));
      return;
    }
    auto& existing = merged[it->second].labelers;
    existing.insert(existing.end(), f.labelers.begin(), f.labelers.end());
    std::sort(existing.begin(), existing.end());
    existing.erase(std::unique(existing.begin(), existing.end()), existing.end());
  };
  for (auto& f : a) absorb(std::move(f));
  for (auto& f : b) absorb(std::move(f));
  return merged;
}

std::vector<LabeledFunction> label_benign(const ingest::CommitGroup& group,
                                          const std::vector<LabeledFunction>& vulnerable,
                                          std::unordered_set<std::string>& labeled_digests) {
  std::unordered_set<std::string_view> vulnerable_records;
  for (const auto& f : vulnerable) {
    if (f.commit_hash == group.commit_hash) vulnerable_records.insert(f.record_id);
  }
  if (vulnerable_records.empty()) return {};

  std::vector<LabeledFunction> out;
  auto emit = [&](LabeledFunction f) {
    if (labeled_digests.insert(f.digest.hex()).second) out.push_back(std::move(f));
  };
  for (const auto& r : group.records) {
    if (!r.changed) {
      emit(make_labeled(r, Version::PostCommit, Label::Benign, Labeler::UnchangedBenign));
    } else if (vulnerable_records.contains(r.record_id) && r.code_after) {
      emit(make_labeled(r, Version::PostCommit, Label::Benign, Labeler::PostCommitBenign));
    }
  }
  return out;
}

Exclusion exclude_unmatched_commits(std::vector<ingest::LinkedCommit> commits,
                                    const std::vector<LabeledFunction>& vulnerable) {
  std::unordered_set<std::string_view> matched;
  for (const auto& f : vulnerable) matched.insert(f.commit_hash);

  Exclusion result;
  for (auto& c : commits) {
    if (matched.contains(c.group.commit_hash)) {
      result.kept.push_back(std::move(c));
    } else {
      ++result.excluded;
    }
  }
  return result;
}

LabelingResult label_corpus(const std::vector<ingest::LinkedCommit>& commits,
                            const LabelingOptions& options, unsigned jobs) {
  struct PerCommit {
    std::vector<LabeledFunction> one_func;
    std::vector<LabeledFunction> nvd_check;
  };
  std::vector<PerCommit> per_commit(commits.size());
  parallel_for(commits.size(), jobs, [&](std::size_t i) {
    const auto& c = commits[i];
    if (options.one_func) per_commit[i].one_func = label_one_func(c.group);
    if (options.nvd_check && c.nvd) {
      per_commit[i].nvd_check = label_nvd_check(c.group, *c.nvd, options.nvd);
    }
  });

  LabelingResult result;
  auto& report = result.report;
  std::vector<LabeledFunction> one_func;
  std::vector<LabeledFunction> nvd_check;
  for (auto& pc : per_commit) {
    report.one_func += pc.one_func.size();
    report.nvd_check += pc.nvd_check.size();
    std::move(pc.one_func.begin(), pc.one_func.end(), std::back_inserter(one_func));
    std::move(pc.nvd_check.begin(), pc.nvd_check.end(), std::back_inserter(nvd_check));
  }
  const auto vulnerable = merge_vulnerable_labels(std::move(one_func), std::move(nvd_check));
  report.vulnerable = vulnerable.size();
  report.both_labelers = static_cast<std::size_t>(
      std::count_if(vulnerable.begin(), vulnerable.end(),
                    [](const LabeledFunction& f) { return f.labelers.size() > 1; }));

  auto exclusion = exclude_unmatched_commits(commits, vulnerable);
  report.commits_total = commits.size();
  report.commits_kept = exclusion.kept.size();
  report.commits_excluded = exclusion.excluded;

  std::unordered_map<std::string_view, std::vector<const LabeledFunction*>> by_commit;
  std::unordered_set<std::string> labeled_digests;
  for (const auto& f : vulnerable) {
    by_commit[f.commit_hash].push_back(&f);
    labeled_digests.insert(f.digest.hex());
  }

  for (const auto& c : exclusion.kept) {
    auto& mine = by_commit[c.group.commit_hash];
    std::vector<LabeledFunction> group_vulnerable;
    for (const auto* f : mine) group_vulnerable.push_back(*f);
    // canonical record order within the commit
    std::unordered_map<std::string_view, std::size_t> position;
    for (std::size_t i = 0; i < c.group.records.size(); ++i) {
      position[c.group.records[i].record_id] = i;
    }
    std::sort(group_vulnerable.begin(), group_vulnerable.end(),
              [&](const LabeledFunction& x, const LabeledFunction& y) {
                return position[x.record_id] < position[y.record_id];
              });

    auto benign = label_benign(c.group, group_vulnerable, labeled_digests);
    for (const auto& f : benign) {
      if (f.has_labeler(Labeler::PostCommitBenign)) {
        ++report.benign_post_commit;
      } else {
        ++report.benign_unchanged;
      }
    }
    std::move(group_vulnerable.begin(), group_vulnerable.end(),
              std::back_inserter(result.corpus));
    std::move(benign.begin(), benign.end(), std::back_inserter(result.corpus));
  }
  return result;
}

}  // namespace vulncur::labeling
