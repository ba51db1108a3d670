#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "vulncur/model.hpp"

namespace vulncur::pairing {

/// Length of the longest common subsequence of two byte strings.
/// Bit-parallel (Hyyrö), O(|a| * |b| / 64).
std::size_t lcs_length(std::string_view a, std::string_view b);

/// 2 * LCS(n(a), n(b)) / (|n(a)| + |n(b)|) on normalized text; 1.0 when both
/// normalize to empty.
double similarity(std::string_view a, std::string_view b);

struct PairReport {
  std::size_t vulnerable = 0;
  std::size_t without_patch = 0;     // no post-commit benign counterpart
  std::size_t below_threshold = 0;
  std::size_t pairs = 0;
  std::size_t per_split[3] = {0, 0, 0};
};

struct PairingResult {
  std::vector<FunctionPair> pairs;
  PairReport report;
};

/// Pairs each vulnerable function with the PostCommitBenign version of the
/// same change record when their similarity reaches `threshold`. Pairs
/// follow the order of the vulnerable functions in `labeled`.
PairingResult build_pairs(std::span<const LabeledFunction> labeled, const DatasetSplit& split,
                          double threshold = 0.8, unsigned jobs = 1);

}  // namespace vulncur::pairing
