#include "vulncur/ingest.hpp"

#include <algorithm>
#include <unordered_map>
#include <tuple>
#include <unordered_set>

#include "vulncur/error.hpp"
#include "vulncur/jsonl.hpp"
#include "vulncur/parallel.hpp"
#include "vulncur/serialize.hpp"

namespace vulncur::ingest {

namespace {

std::vector<FunctionChangeRecord> parse_lines(const std::vector<jsonl::Line>& lines,
                                              unsigned jobs) {
  std::vector<FunctionChangeRecord> records(lines.size());
  parallel_for(lines.size(), jobs, [&](std::size_t i) {
    const auto& line = lines[i];
    const auto j = jsonl::parse_line(line);
    try {
      records[i] = json_io::change_record_from_json(j);
    } catch (const Error& e) {
      throw Error(e.code(), e.subject(), line.number, "invalid record");
    }
  });

  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!seen.insert(records[i].record_id).second) {
      throw Error(Errc::DuplicateRecordId, records[i].record_id, lines[i].number);
    }
  }
  return records;
}

void add_entry(NvdFeed& feed, const nlohmann::json& j, std::size_t position) {
  NvdEntry entry;
  try {
    entry = json_io::nvd_entry_from_json(j);
  } catch (const Error& e) {
    throw Error(Errc::MalformedEntry, e.subject(), position, e.what());
  }
  if (feed.contains(entry.cve_id)) throw Error(Errc::DuplicateCve, entry.cve_id, position);
  auto id = entry.cve_id;
  feed.emplace(std::move(id), std::move(entry));
}

}  // namespace

std::vector<FunctionChangeRecord> parse_function_changes(const std::string& text, unsigned jobs) {
  return parse_lines(jsonl::split_lines(text), jobs);
}

std::vector<FunctionChangeRecord> read_function_changes(const std::filesystem::path& path,
                                                        unsigned jobs) {
  return parse_lines(jsonl::read_lines(path), jobs);
}

NvdFeed parse_nvd_feed(const std::string& text) {
  NvdFeed feed;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return feed;

  if (text[first] == '[') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::MalformedEntry, {}, std::nullopt, e.what());
    }
    std::size_t index = 0;
    for (const auto& j : doc) add_entry(feed, j, ++index);
    return feed;
  }

  for (const auto& line : jsonl::split_lines(text)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line.text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::MalformedEntry, {}, line.number, e.what());
    }
    add_entry(feed, j, line.number);
  }
  return feed;
}

NvdFeed read_nvd_feed(const std::filesystem::path& path) {
  return parse_nvd_feed(jsonl::read_file(path));
}

std::vector<LinkedCommit> link_commits_to_cves(const std::vector<FunctionChangeRecord>& records,
                                               const NvdFeed& feed) {
  std::vector<CommitGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.try_emplace(r.commit_hash, groups.size());
    if (inserted) {
      groups.push_back({r.commit_hash, r.commit_date, std::nullopt, {}});
    }
    auto& g = groups[it->second];
    g.commit_date = std::min(g.commit_date, r.commit_date);
    if (r.cve_id) {
      if (g.cve_id && *g.cve_id != *r.cve_id) {
        throw Error(Errc::ConflictingCve, r.commit_hash, std::nullopt,
                    *g.cve_id + " vs " + *r.cve_id);
      }
      g.cve_id = r.cve_id;
    }
    g.records.push_back(r);
  }

  std::sort(groups.begin(), groups.end(), [](const CommitGroup& a, const CommitGroup& b) {
    return std::tie(a.commit_date, a.commit_hash) < std::tie(b.commit_date, b.commit_hash);
  });

  std::vector<LinkedCommit> linked;
  linked.reserve(groups.size());
  for (auto& g : groups) {
    std::sort(g.records.begin(), g.records.end(), canonical_less);
    std::optional<NvdEntry> nvd;
    if (g.cve_id) {
      if (auto it = feed.find(*g.cve_id); it != feed.end()) nvd = it->second;
    }
    linked.push_back({std::move(g), std::move(nvd)});
  }
  return linked;
}

std::vector<FunctionChangeRecord> filter_sources(std::vector<FunctionChangeRecord> records,
                                                 const std::vector<std::string>& excluded) {
  if (excluded.empty()) return records;
  std::erase_if(records, [&](const FunctionChangeRecord& r) {
    return std::find(excluded.begin(), excluded.end(), r.source_dataset) != excluded.end();
  });
  return records;
}

}  // namespace vulncur::ingest
