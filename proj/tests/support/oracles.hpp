#pragma once

// Reference implementations used only by tests. Each one is written the slow
// obvious way and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vulncur/model.hpp"

namespace vulncur::oracle {

inline std::string strip(const std::string& s) {
  std::string out;
  std::remove_copy_if(s.begin(), s.end(), std::back_inserter(out), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
  return out;
}

// Full (|a|+1) x (|b|+1) table.
inline std::size_t lcs_dp(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

// Enumerates every subsequence of the shorter string. Only for tiny inputs.
inline std::size_t lcs_brute(const std::string& a, const std::string& b) {
  const std::string& s = a.size() <= b.size() ? a : b;
  const std::string& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << s.size()); ++mask) {
    std::string sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    std::size_t k = 0;
    for (char c : t) {
      if (k < sub.size() && sub[k] == c) ++k;
    }
    if (k == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

inline double similarity(const std::string& a, const std::string& b) {
  const auto x = strip(a);
  const auto y = strip(b);
  if (x.empty() && y.empty()) return 1.0;
  return 2.0 * static_cast<double>(lcs_dp(x, y)) / static_cast<double>(x.size() + y.size());
}

struct Sweep {
  double fnr = 1.0;
  double fpr = 0.0;
  double threshold = 0.0;
};

// Tries every candidate threshold and keeps the best one under the rule:
// minimum FNR with FPR <= r, then lower FPR, then higher threshold.
inline Sweep vd_sweep(const std::vector<std::pair<double, bool>>& samples, double r) {
  std::set<double> candidates;
  double top = -std::numeric_limits<double>::infinity();
  std::size_t nv = 0;
  std::size_t nb = 0;
  for (const auto& [score, vuln] : samples) {
    candidates.insert(score);
    top = std::max(top, score);
    (vuln ? nv : nb)++;
  }
  candidates.insert(std::nextafter(top, std::numeric_limits<double>::infinity()));

  std::optional<Sweep> best;
  for (double t : candidates) {
    std::size_t fn = 0;
    std::size_t fp = 0;
    for (const auto& [score, vuln] : samples) {
      const bool flagged = score >= t;
      if (vuln && !flagged) ++fn;
      if (!vuln && flagged) ++fp;
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(nb);
    const double fnr = static_cast<double>(fn) / static_cast<double>(nv);
    if (fpr > r) continue;
    const Sweep cur{fnr, fpr, t};
    if (!best || std::tie(cur.fnr, cur.fpr) < std::tie(best->fnr, best->fpr) ||
        (cur.fnr == best->fnr && cur.fpr == best->fpr && cur.threshold > best->threshold)) {
      best = cur;
    }
  }
  return *best;
}

struct DedupOutcome {
  std::vector<FunctionChangeRecord> records;
  std::size_t kept = 0;
  std::size_t dropped_unchanged = 0;
  std::size_t dropped_duplicate = 0;
};

// Pairwise comparison of normalized text against every version kept so far.
inline DedupOutcome dedup(std::vector<FunctionChangeRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& x, const auto& y) {
    return std::tie(x.commit_date, x.commit_hash, x.file_path, x.function_name, x.record_id) <
           std::tie(y.commit_date, y.commit_hash, y.file_path, y.function_name, y.record_id);
  });
  DedupOutcome out;
  std::vector<std::string> kept;
  auto seen = [&](const std::string& code) {
    const auto n = strip(code);
    for (const auto& k : kept) {
      if (k == n) return true;
    }
    kept.push_back(n);
    return false;
  };
  for (auto r : records) {
    if (!r.changed) {
      if (seen(r.code_before ? *r.code_before : *r.code_after)) {
        ++out.dropped_duplicate;
      } else {
        ++out.kept;
        out.records.push_back(r);
      }
      continue;
    }
    if (r.code_before && r.code_after && strip(*r.code_before) == strip(*r.code_after)) {
      ++out.dropped_unchanged;
      continue;
    }
    for (auto* version : {&r.code_before, &r.code_after}) {
      if (!*version) continue;
      if (seen(**version)) {
        ++out.dropped_duplicate;
        version->reset();
      } else {
        ++out.kept;
      }
    }
    if (r.code_before || r.code_after) out.records.push_back(r);
  }
  return out;
}

// "two or more agree, any unsure means discussion", for a panel of three.
inline std::optional<Verdict> majority3(const std::vector<Verdict>& votes) {
  if (votes.size() < 3) return std::nullopt;
  for (auto v : votes) {
    if (v == Verdict::Unsure) return std::nullopt;
  }
  const auto yes = std::count(votes.begin(), votes.end(), Verdict::Vulnerable);
  const auto no = std::count(votes.begin(), votes.end(), Verdict::NotVulnerable);
  if (yes >= 2) return Verdict::Vulnerable;
  if (no >= 2) return Verdict::NotVulnerable;
  return std::nullopt;
}

}  // namespace vulncur::oracle
