#include "vulncur/audit.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "vulncur/error.hpp"
#include "vulncur/jsonl.hpp"
#include "vulncur/serialize.hpp"

namespace vulncur::audit {

namespace {

/// Uniform integer in [0, bound) from raw engine output.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

constexpr ErrorCategory kErrorCategories[] = {ErrorCategory::MultiFunctionSpread,
                                              ErrorCategory::RelevantConsistency,
                                              ErrorCategory::Irrelevant};

}  // namespace

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed) {
  if (n > population) {
    throw Error(Errc::InsufficientPopulation, {}, std::nullopt,
                "requested " + std::to_string(n) + " of " + std::to_string(population));
  }
  std::vector<std::size_t> pool(population);
  for (std::size_t i = 0; i < population; ++i) pool[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

std::vector<AuditSample> draw_sample(std::span<const LabeledFunction> labeled,
                                     std::span<const FunctionChangeRecord> records,
                                     const ingest::NvdFeed& feed, std::size_t n,
                                     std::uint64_t seed, std::optional<Labeler> labeler) {
  std::vector<const LabeledFunction*> population;
  for (const auto& f : labeled) {
    if (f.is_vulnerable() && (!labeler || f.has_labeler(*labeler))) population.push_back(&f);
  }
  std::unordered_map<std::string_view, const FunctionChangeRecord*> by_id;
  for (const auto& r : records) by_id[r.record_id] = &r;

  const auto picks = sample_indices(population.size(), n, seed);
  std::vector<AuditSample> samples;
  samples.reserve(n);
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const auto& f = *population[picks[k]];
    AuditSample s;
    std::ostringstream id;
    id << "s" << std::setw(4) << std::setfill('0') << (k + 1);
    s.sample_id = id.str();
    s.record_id = f.id;
    s.seed = seed;
    s.labelers = f.labelers;
    s.commit_hash = f.commit_hash;
    s.cve_id = f.cve_id;
    s.code_before = f.code;
    if (auto it = by_id.find(f.record_id); it != by_id.end()) {
      const auto& r = *it->second;
      s.project = r.project;
      s.file_path = r.file_path;
      s.function_name = r.function_name;
      s.commit_message = r.commit_message;
      if (r.code_before) s.code_before = r.code_before;
      s.code_after = r.code_after;
    }
    if (s.cve_id) {
      if (auto it = feed.find(*s.cve_id); it != feed.end()) s.nvd_description = it->second.description;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void validate_vote(const AnnotatorVote& vote) {
  if (vote.verdict == Verdict::Vulnerable && vote.category != ErrorCategory::Correct) {
    throw Error(Errc::InvalidArgument, "category", std::nullopt,
                "a vulnerable verdict takes category Correct");
  }
  if (vote.verdict == Verdict::NotVulnerable && vote.category == ErrorCategory::Correct) {
    throw Error(Errc::InvalidArgument, "category", std::nullopt,
                "a not_vulnerable verdict needs an error category");
  }
}

AuditResolution resolve_majority(const std::string& sample_id, std::span<const AnnotatorVote> votes,
                                 std::size_t panel_size) {
  AuditResolution res{sample_id, std::nullopt, ResolutionStatus::NeedsDiscussion,
                      ErrorCategory::Correct};
  if (votes.size() < panel_size) return res;

  std::size_t vulnerable = 0;
  std::size_t not_vulnerable = 0;
  std::map<ErrorCategory, std::size_t> categories;
  for (const auto& v : votes) {
    switch (v.verdict) {
      case Verdict::Unsure: return res;
      case Verdict::Vulnerable: ++vulnerable; break;
      case Verdict::NotVulnerable:
        ++not_vulnerable;
        ++categories[v.category];
        break;
    }
  }
  const std::size_t majority = panel_size / 2 + 1;
  if (vulnerable >= majority) {
    res.final_label = Verdict::Vulnerable;
    res.status = ResolutionStatus::Resolved;
  } else if (not_vulnerable >= majority) {
    res.final_label = Verdict::NotVulnerable;
    res.status = ResolutionStatus::Resolved;
    // most common error category; ties go to the earlier category
    std::size_t best = 0;
    for (auto c : kErrorCategories) {
      if (categories[c] > best) {
        best = categories[c];
        res.category = c;
      }
    }
  }
  return res;
}

AccuracyReport accuracy_report(std::span<const AuditResolution> resolutions) {
  AccuracyReport report;
  for (auto c : kErrorCategories) report.breakdown[c] = {};
  for (const auto& r : resolutions) {
    if (r.status != ResolutionStatus::Resolved) throw Error(Errc::UnresolvedSamples, r.sample_id);
    ++report.samples;
    if (r.final_label == Verdict::Vulnerable) {
      ++report.correct;
    } else {
      ++report.breakdown[r.category].count;
    }
  }
  auto pct = [&](std::size_t k) {
    return report.samples == 0 ? 0.0
                               : 100.0 * static_cast<double>(k) / static_cast<double>(report.samples);
  };
  report.correct_pct = pct(report.correct);
  for (auto& [_, share] : report.breakdown) share.percent = pct(share.count);
  return report;
}

std::string format_percent(double pct) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << pct;
  return out.str();
}

std::string format_report(const AccuracyReport& report) {
  std::ostringstream out;
  out << "label accuracy  " << format_percent(report.correct_pct) << "  (" << report.correct << "/"
      << report.samples << ")\n";
  for (const auto& [category, share] : report.breakdown) {
    out << "  " << std::left << std::setw(22) << to_string(category) << std::right
        << std::setw(6) << format_percent(share.percent) << "  (" << share.count << ")\n";
  }
  return out.str();
}

nlohmann::ordered_json to_json(const AccuracyReport& report) {
  nlohmann::ordered_json breakdown = nlohmann::ordered_json::object();
  for (const auto& [category, share] : report.breakdown) {
    breakdown[std::string(to_string(category))] = {
        {"count", share.count}, {"percent", json_io::round_to(share.percent, 1)}};
  }
  return {{"samples", report.samples},
          {"correct", report.correct},
          {"correct_pct", json_io::round_to(report.correct_pct, 1)},
          {"breakdown", std::move(breakdown)}};
}

// ---- AuditStore ----------------------------------------------------------------

AuditStore::AuditStore(std::vector<AuditSample> samples, AuditOptions options)
    : options_(options) {
  for (auto& s : samples) {
    if (!index_.emplace(s.sample_id, samples_.size()).second) {
      throw Error(Errc::InvalidArgument, s.sample_id, std::nullopt, "duplicate sample_id");
    }
    samples_.push_back(std::move(s));
  }
}

AuditStore::AuditStore(AuditOptions options, std::filesystem::path log)
    : options_(options), log_path_(std::move(log)) {}

std::unique_ptr<AuditStore> AuditStore::create(const std::filesystem::path& log,
                                               std::vector<AuditSample> samples,
                                               AuditOptions options) {
  if (std::filesystem::exists(log)) {
    throw Error(Errc::Io, log.string(), std::nullopt, "audit log already exists");
  }
  std::unique_ptr<AuditStore> store(new AuditStore(options, log));
  std::vector<std::string> lines;
  for (auto& s : samples) {
    if (!store->index_.emplace(s.sample_id, store->samples_.size()).second) {
      throw Error(Errc::InvalidArgument, s.sample_id, std::nullopt, "duplicate sample_id");
    }
    lines.push_back(nlohmann::ordered_json{{"event", "sample"}, {"sample", json_io::to_json(s)}}.dump());
    store->samples_.push_back(std::move(s));
  }
  jsonl::write_lines(log, lines);
  store->log_.open(log, std::ios::binary | std::ios::app);
  if (!store->log_) throw Error(Errc::Io, log.string(), std::nullopt, "cannot open for append");
  return store;
}

std::unique_ptr<AuditStore> AuditStore::open(const std::filesystem::path& log,
                                             AuditOptions options) {
  std::unique_ptr<AuditStore> store(new AuditStore(options, log));
  for (const auto& line : jsonl::read_lines(log)) {
    const auto j = jsonl::parse_line(line);
    try {
      const auto type = j.at("event").get<std::string>();
      if (type == "sample") {
        auto s = json_io::audit_sample_from_json(j.at("sample"));
        if (!store->index_.emplace(s.sample_id, store->samples_.size()).second) {
          throw Error(Errc::InvalidArgument, s.sample_id, std::nullopt, "duplicate sample_id");
        }
        store->samples_.push_back(std::move(s));
      } else if (type == "vote" || type == "revision") {
        store->apply_vote(json_io::annotator_vote_from_json(j.at("vote")), type == "revision");
      } else {
        throw Error(Errc::SchemaViolation, "event", std::nullopt, "unknown event '" + type + "'");
      }
    } catch (const Error& e) {
      throw Error(e.code(), e.subject(), line.number, e.what()).with_file(log.string());
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaViolation, "event", line.number, e.what()).with_file(log.string());
    }
  }
  store->log_.open(log, std::ios::binary | std::ios::app);
  if (!store->log_) throw Error(Errc::Io, log.string(), std::nullopt, "cannot open for append");
  return store;
}

std::vector<AuditSample> AuditStore::samples() const {
  std::shared_lock lock(mu_);
  return samples_;
}

std::optional<AuditSample> AuditStore::find(const std::string& sample_id) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(sample_id);
  if (it == index_.end()) return std::nullopt;
  return samples_[it->second];
}

std::optional<AuditSample> AuditStore::next_pending(const std::string& annotator_id) const {
  std::shared_lock lock(mu_);
  for (const auto& s : samples_) {
    auto it = votes_.find(s.sample_id);
    const bool voted = it != votes_.end() &&
                       std::any_of(it->second.begin(), it->second.end(), [&](const AnnotatorVote& v) {
                         return v.annotator_id == annotator_id;
                       });
    if (!voted) return s;
  }
  return std::nullopt;
}

std::vector<AnnotatorVote>::iterator AuditStore::check_vote(const AnnotatorVote& vote,
                                                           bool revision) {
  if (!index_.contains(vote.sample_id)) throw Error(Errc::UnknownSample, vote.sample_id);
  validate_vote(vote);
  auto& votes = votes_[vote.sample_id];
  auto it = std::find_if(votes.begin(), votes.end(), [&](const AnnotatorVote& v) {
    return v.annotator_id == vote.annotator_id;
  });
  if (revision && it == votes.end()) {
    throw Error(Errc::UnknownVote, vote.sample_id + "/" + vote.annotator_id);
  }
  if (!revision && it != votes.end()) {
    throw Error(Errc::DuplicateVote, vote.sample_id + "/" + vote.annotator_id);
  }
  return it;
}

void AuditStore::apply_vote(const AnnotatorVote& vote, bool revision) {
  auto it = check_vote(vote, revision);
  if (revision) {
    *it = vote;
  } else {
    votes_[vote.sample_id].push_back(vote);
  }
}

void AuditStore::append_event(const nlohmann::ordered_json& event) {
  if (!log_path_) return;
  log_ << event.dump() << '\n';
  log_.flush();
  if (!log_) {
    log_.clear();
    throw Error(Errc::Io, log_path_->string(), std::nullopt, "append failed");
  }
}

void AuditStore::record_vote(const AnnotatorVote& vote) {
  std::unique_lock lock(mu_);
  check_vote(vote, false);
  append_event({{"event", "vote"}, {"vote", json_io::to_json(vote)}});
  apply_vote(vote, false);
}

void AuditStore::revise_vote(const AnnotatorVote& vote) {
  std::unique_lock lock(mu_);
  check_vote(vote, true);
  append_event({{"event", "revision"}, {"vote", json_io::to_json(vote)}});
  apply_vote(vote, true);
}

std::vector<AnnotatorVote> AuditStore::votes(const std::string& sample_id) const {
  std::shared_lock lock(mu_);
  if (!index_.contains(sample_id)) throw Error(Errc::UnknownSample, sample_id);
  auto it = votes_.find(sample_id);
  return it == votes_.end() ? std::vector<AnnotatorVote>{} : it->second;
}

AuditResolution AuditStore::resolution_locked(const std::string& sample_id) const {
  if (!index_.contains(sample_id)) throw Error(Errc::UnknownSample, sample_id);
  auto it = votes_.find(sample_id);
  static const std::vector<AnnotatorVote> kNone;
  return resolve_majority(sample_id, it == votes_.end() ? kNone : it->second, options_.panel_size);
}

AuditResolution AuditStore::resolution(const std::string& sample_id) const {
  std::shared_lock lock(mu_);
  return resolution_locked(sample_id);
}

std::vector<AuditResolution> AuditStore::resolutions() const {
  std::shared_lock lock(mu_);
  std::vector<AuditResolution> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(resolution_locked(s.sample_id));
  return out;
}

AccuracyReport AuditStore::report() const {
  const auto all = resolutions();
  return accuracy_report(all);
}

}  // namespace vulncur::audit
