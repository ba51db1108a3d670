#pragma once

#include <array>
#include <span>

#include "vulncur/model.hpp"

namespace vulncur::splitting {

using Fractions = std::array<double, 3>;

/// Commit-atomic temporal split. Commits are ordered by (commit_date,
/// commit_hash); each commit goes to the current split, and the current split
/// advances once the running function count first reaches
/// f_train * total (train -> dev) or (f_train + f_dev) * total (dev -> test).
///
/// Raises InvalidFractions, EmptyCorpus, or DegenerateSplit when a split
/// would receive no commit.
DatasetSplit temporal_split(std::span<const LabeledFunction> labeled,
                            const Fractions& fractions = {0.8, 0.1, 0.1});

struct SplitCounts {
  std::size_t commits = 0;
  std::size_t vulnerable = 0;
  std::size_t benign = 0;

  std::size_t total() const noexcept { return vulnerable + benign; }
};

std::array<SplitCounts, 3> count_splits(std::span<const LabeledFunction> labeled,
                                        const DatasetSplit& split);

}  // namespace vulncur::splitting
