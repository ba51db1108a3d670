#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vulncur/model.hpp"

namespace vulncur::ingest {

using NvdFeed = std::map<std::string, NvdEntry>;

/// All records of one commit, in canonical order.
struct CommitGroup {
  std::string commit_hash;
  Timestamp commit_date = 0;  // earliest commit_date among the records
  std::optional<std::string> cve_id;
  std::vector<FunctionChangeRecord> records;
};

struct LinkedCommit {
  CommitGroup group;
  std::optional<NvdEntry> nvd;
};

/// Reads function-change JSONL. Records come back in file order; the first
/// invalid line (in file order) raises MalformedLine, SchemaViolation or
/// DuplicateRecordId with its line number. Parsing runs on `jobs` threads.
std::vector<FunctionChangeRecord> read_function_changes(const std::filesystem::path& path,
                                                        unsigned jobs = 1);

/// Same as read_function_changes but over in-memory text.
std::vector<FunctionChangeRecord> parse_function_changes(const std::string& text,
                                                         unsigned jobs = 1);

/// Accepts a JSON array of entries or JSONL. Raises MalformedEntry (with the
/// entry's line or 1-based index) or DuplicateCve.
NvdFeed read_nvd_feed(const std::filesystem::path& path);
NvdFeed parse_nvd_feed(const std::string& text);

/// Groups records by commit_hash and attaches the NVD entry of each commit's
/// CVE when the feed has it. Groups are ordered by (commit_date, commit_hash).
/// Raises ConflictingCve when one commit cites two different CVEs.
std::vector<LinkedCommit> link_commits_to_cves(const std::vector<FunctionChangeRecord>& records,
                                               const NvdFeed& feed);

/// Drops records whose source_dataset is listed in `excluded`.
std::vector<FunctionChangeRecord> filter_sources(std::vector<FunctionChangeRecord> records,
                                                 const std::vector<std::string>& excluded);

}  // namespace vulncur::ingest
