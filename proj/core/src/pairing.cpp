#include "vulncur/pairing.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <unordered_map>

#include "vulncur/dedup.hpp"
#include "vulncur/parallel.hpp"

namespace vulncur::pairing {

std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);  // bit vector over the longer string
  if (b.empty()) return 0;

  const std::size_t m = a.size();
  const std::size_t words = (m + 63) / 64;

  // match[c] has bit i set where a[i] == c; only bytes present in `a` get a row.
  std::array<std::int32_t, 256> row_of;
  row_of.fill(-1);
  std::vector<std::uint64_t> match;
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = row_of[static_cast<unsigned char>(a[i])];
    if (row < 0) {
      row = static_cast<std::int32_t>(match.size() / words);
      match.resize(match.size() + words, 0);
    }
    match[static_cast<std::size_t>(row) * words + i / 64] |= std::uint64_t{1} << (i % 64);
  }

  // V starts all ones; each zero bit left at the end is one LCS character.
  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  if (m % 64 != 0) v.back() = (std::uint64_t{1} << (m % 64)) - 1;

  for (char ch : b) {
    const auto row = row_of[static_cast<unsigned char>(ch)];
    if (row < 0) continue;  // U = 0 leaves V unchanged
    const std::uint64_t* mrow = &match[static_cast<std::size_t>(row) * words];
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & mrow[w];
      const std::uint64_t sum1 = v[w] + u;
      const std::uint64_t c1 = sum1 < v[w] ? 1 : 0;
      const std::uint64_t sum = sum1 + carry;
      const std::uint64_t c2 = sum < sum1 ? 1 : 0;
      carry = c1 | c2;
      v[w] = sum | (v[w] - u);
    }
  }
  if (m % 64 != 0) v.back() &= (std::uint64_t{1} << (m % 64)) - 1;

  std::size_t ones = 0;
  for (auto w : v) ones += static_cast<std::size_t>(std::popcount(w));
  return m - ones;
}

double similarity(std::string_view a, std::string_view b) {
  const auto na = dedup::normalize(a);
  const auto nb = dedup::normalize(b);
  if (na.empty() && nb.empty()) return 1.0;
  const auto lcs = lcs_length(na, nb);
  return 2.0 * static_cast<double>(lcs) / static_cast<double>(na.size() + nb.size());
}

PairingResult build_pairs(std::span<const LabeledFunction> labeled, const DatasetSplit& split,
                          double threshold, unsigned jobs) {
  std::unordered_map<std::string_view, const LabeledFunction*> patched;
  for (const auto& f : labeled) {
    if (f.has_labeler(Labeler::PostCommitBenign)) patched[f.record_id] = &f;
  }

  struct Candidate {
    const LabeledFunction* vulnerable;
    const LabeledFunction* benign;
    double similarity = 0.0;
  };
  PairingResult result;
  std::vector<Candidate> candidates;
  for (const auto& f : labeled) {
    if (!f.is_vulnerable()) continue;
    ++result.report.vulnerable;
    auto it = patched.find(f.record_id);
    if (it == patched.end()) {
      ++result.report.without_patch;
      continue;
    }
    candidates.push_back({&f, it->second});
  }

  parallel_for(candidates.size(), jobs, [&](std::size_t i) {
    candidates[i].similarity = similarity(candidates[i].vulnerable->code, candidates[i].benign->code);
  });

  for (const auto& c : candidates) {
    if (c.similarity < threshold) {
      ++result.report.below_threshold;
      continue;
    }
    const auto s = split.find(c.vulnerable->id);
    if (!s || split.find(c.benign->id) != s) continue;  // both sides must share a split
    result.pairs.push_back({c.vulnerable->id, c.benign->id, c.similarity});
    ++result.report.per_split[static_cast<int>(*s)];
  }
  result.report.pairs = result.pairs.size();
  return result;
}

}  // namespace vulncur::pairing
