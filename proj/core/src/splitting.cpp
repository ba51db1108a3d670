#include "vulncur/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "vulncur/error.hpp"

namespace vulncur::splitting {

namespace {

// Absorbs floating-point error in fraction * total.
constexpr double kBoundarySlack = 1e-9;

struct Commit {
  Timestamp date;
  std::string hash;
  std::vector<const LabeledFunction*> members;
};

}  // namespace

DatasetSplit temporal_split(std::span<const LabeledFunction> labeled, const Fractions& fractions) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  const bool positive = std::all_of(fractions.begin(), fractions.end(),
                                    [](double f) { return f > 0.0 && std::isfinite(f); });
  if (!positive || std::abs(sum - 1.0) > 1e-6) {
    throw Error(Errc::InvalidFractions, {}, std::nullopt,
                "fractions must be positive and sum to 1");
  }
  if (labeled.empty()) throw Error(Errc::EmptyCorpus, {});

  std::map<std::string, Commit> by_hash;
  for (const auto& f : labeled) {
    auto [it, inserted] = by_hash.try_emplace(f.commit_hash, Commit{f.commit_date, f.commit_hash, {}});
    it->second.date = std::min(it->second.date, f.commit_date);
    it->second.members.push_back(&f);
  }
  std::vector<Commit*> commits;
  commits.reserve(by_hash.size());
  for (auto& [_, c] : by_hash) commits.push_back(&c);
  std::sort(commits.begin(), commits.end(), [](const Commit* a, const Commit* b) {
    return std::tie(a->date, a->hash) < std::tie(b->date, b->hash);
  });

  const double total = static_cast<double>(labeled.size());
  const double boundaries[2] = {fractions[0] * total, (fractions[0] + fractions[1]) * total};

  DatasetSplit split;
  std::copy(fractions.begin(), fractions.end(), split.fractions);
  std::size_t commits_in[3] = {0, 0, 0};
  int current = 0;
  std::size_t cumulative = 0;
  for (const Commit* c : commits) {
    for (const auto* f : c->members) {
      split.assignment[f->id] = static_cast<SplitName>(current);
    }
    ++commits_in[current];
    cumulative += c->members.size();
    if (current < 2 && static_cast<double>(cumulative) + kBoundarySlack >= boundaries[current]) {
      ++current;
    }
  }

  for (int s = 0; s < 3; ++s) {
    if (commits_in[s] == 0) {
      throw Error(Errc::DegenerateSplit, std::string(to_string(static_cast<SplitName>(s))),
                  std::nullopt, "no commit left for this split");
    }
  }
  return split;
}

std::array<SplitCounts, 3> count_splits(std::span<const LabeledFunction> labeled,
                                        const DatasetSplit& split) {
  std::array<SplitCounts, 3> counts{};
  std::array<std::set<std::string_view>, 3> commits;
  for (const auto& f : labeled) {
    auto s = split.find(f.id);
    if (!s) continue;
    auto& c = counts[static_cast<int>(*s)];
    (f.is_vulnerable() ? c.vulnerable : c.benign) += 1;
    commits[static_cast<int>(*s)].insert(f.commit_hash);
  }
  for (int s = 0; s < 3; ++s) counts[s].commits = commits[s].size();
  return counts;
}

}  // namespace vulncur::splitting
