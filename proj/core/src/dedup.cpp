#include "vulncur/dedup.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>
#include <stdexcept>
#include <unordered_set>

#include "vulncur/error.hpp"
#include "vulncur/parallel.hpp"

namespace vulncur::dedup {

namespace {

constexpr bool is_formatting(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

struct DigestHash {
  std::size_t operator()(const NormalizedDigest& d) const noexcept {
    return std::hash<std::string>{}(d.hex());
  }
};

using DigestSet = std::unordered_set<NormalizedDigest, DigestHash>;

}  // namespace

std::string normalize(std::string_view code) {
  std::string out;
  out.reserve(code.size());
  for (char c : code) {
    if (!is_formatting(c)) out.push_back(c);
  }
  return out;
}

std::string md5_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> raw{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), raw.data(), &len, EVP_md5(), nullptr) != 1) {
    throw std::runtime_error("EVP_Digest(md5) failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[raw[i] >> 4]);
    hex.push_back(kHex[raw[i] & 0xF]);
  }
  return hex;
}

NormalizedDigest digest(std::string_view code) { return NormalizedDigest(md5_hex(normalize(code))); }

bool drop_unchanged(const FunctionChangeRecord& record) {
  if (!record.code_before && !record.code_after) {
    throw Error(Errc::MissingVersion, record.record_id);
  }
  if (!record.changed) return true;
  if (!record.code_before || !record.code_after) return false;
  return digest(*record.code_before) == digest(*record.code_after);
}

DedupResult dedup_corpus(std::vector<FunctionChangeRecord> records, unsigned jobs) {
  std::sort(records.begin(), records.end(), canonical_less);

  // Per-record digests of the versions it contributes.
  struct Digests {
    std::optional<NormalizedDigest> before;
    std::optional<NormalizedDigest> after;
  };
  std::vector<Digests> digests(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& r = records[i];
    if (r.code_before) digests[i].before = digest(*r.code_before);
    if (r.code_after && r.changed) digests[i].after = digest(*r.code_after);
  });

  DedupResult result;
  DigestSet seen;
  seen.reserve(records.size() * 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    auto& d = digests[i];
    if (!r.code_before && !r.code_after) throw Error(Errc::MissingVersion, r.record_id);

    if (!r.changed) {
      const auto& only = d.before ? *d.before : digest(*r.code_after);
      if (!seen.insert(only).second) {
        ++result.report.dropped_duplicate;
        continue;
      }
      ++result.report.kept;
      result.records.push_back(std::move(r));
      continue;
    }

    if (d.before && d.after && *d.before == *d.after) {
      ++result.report.dropped_unchanged;
      continue;
    }
    if (d.before && !seen.insert(*d.before).second) {
      ++result.report.dropped_duplicate;
      r.code_before.reset();
    } else if (d.before) {
      ++result.report.kept;
    }
    if (d.after && !seen.insert(*d.after).second) {
      ++result.report.dropped_duplicate;
      r.code_after.reset();
    } else if (d.after) {
      ++result.report.kept;
    }
    if (r.code_before || r.code_after) result.records.push_back(std::move(r));
  }
  return result;
}

std::vector<bool> duplicate_flags(std::span<const std::string> texts) {
  std::vector<bool> flags(texts.size(), false);
  DigestSet seen;
  seen.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    flags[i] = !seen.insert(digest(texts[i])).second;
  }
  return flags;
}

double leakage_report(std::span<const LabeledFunction> train,
                      std::span<const LabeledFunction> test) {
  DigestSet train_digests;
  train_digests.reserve(train.size());
  for (const auto& f : train) train_digests.insert(f.digest);

  std::size_t vulnerable = 0;
  std::size_t leaked = 0;
  for (const auto& f : test) {
    if (!f.is_vulnerable()) continue;
    ++vulnerable;
    if (train_digests.contains(f.digest)) ++leaked;
  }
  if (vulnerable == 0) return 0.0;
  return 100.0 * static_cast<double>(leaked) / static_cast<double>(vulnerable);
}

}  // namespace vulncur::dedup
