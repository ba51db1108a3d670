#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulncur/model.hpp"

namespace vulncur::dedup {

/// Removes every space, tab, line feed and carriage return. Other bytes
/// (including \v and \f) are kept.
std::string normalize(std::string_view code);

/// MD5 of normalize(code), lowercase hex.
NormalizedDigest digest(std::string_view code);

/// Plain MD5 of raw bytes, lowercase hex.
std::string md5_hex(std::string_view bytes);

/// True when the record should not be treated as a changed function:
/// changed=false records, or records whose two versions normalize equal.
/// A changed record missing one version is kept (false). Raises
/// MissingVersion for a record without any version.
bool drop_unchanged(const FunctionChangeRecord& record);

struct DedupReport {
  std::size_t kept = 0;               // function versions retained
  std::size_t dropped_unchanged = 0;  // changed records whose versions normalize equal
  std::size_t dropped_duplicate = 0;  // versions whose digest was already seen

  bool operator==(const DedupReport&) const = default;
};

struct DedupResult {
  /// Records in canonical order. A discarded version is reset to nullopt;
  /// records left with no version are removed. A changed=false record
  /// contributes a single version and keeps both fields populated.
  std::vector<FunctionChangeRecord> records;
  DedupReport report;
};

/// Walks records in canonical order with one running digest set shared by
/// pre- and post-commit versions. Digests are computed on `jobs` threads;
/// the result does not depend on `jobs` or on the input order.
DedupResult dedup_corpus(std::vector<FunctionChangeRecord> records, unsigned jobs = 1);

/// For each text, whether an earlier text has the same digest.
std::vector<bool> duplicate_flags(std::span<const std::string> texts);

/// Percentage of vulnerable test functions whose digest appears anywhere in
/// train; 0 when test has no vulnerable function.
double leakage_report(std::span<const LabeledFunction> train,
                      std::span<const LabeledFunction> test);

}  // namespace vulncur::dedup
