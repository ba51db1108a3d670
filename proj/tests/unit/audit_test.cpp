#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "gen.hpp"
#include "oracles.hpp"
#include "vulncur/audit.hpp"
#include "vulncur/error.hpp"
#include "vulncur/labeling.hpp"

namespace vulncur {
namespace {

namespace fs = std::filesystem;
using testing::Rng;

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::Io;
}

AnnotatorVote vote(const std::string& sample, const std::string& who, Verdict v,
                   ErrorCategory c = ErrorCategory::Correct) {
  if (v == Verdict::NotVulnerable && c == ErrorCategory::Correct) c = ErrorCategory::Irrelevant;
  return AnnotatorVote{sample, who, v, c};
}

std::vector<AuditSample> samples(std::size_t n) {
  std::vector<AuditSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    AuditSample s;
    s.sample_id = "s" + std::to_string(1000 + i);
    s.record_id = "r" + std::to_string(i) + "#pre";
    s.code_before = "int f(void);";
    out.push_back(s);
  }
  return out;
}

struct TempLog {
  fs::path path;
  explicit TempLog(const std::string& name)
      : path(fs::temp_directory_path() / ("vulncur_" + name + "_" + std::to_string(::getpid()) + ".jsonl")) {
    fs::remove(path);
  }
  ~TempLog() { fs::remove(path); }
};

TEST(Majority, AllTwentySevenCombinations) {
  const Verdict all[] = {Verdict::Vulnerable, Verdict::NotVulnerable, Verdict::Unsure};
  int checked = 0;
  for (auto a : all) {
    for (auto b : all) {
      for (auto c : all) {
        const std::vector<AnnotatorVote> votes = {vote("s", "a", a), vote("s", "b", b), vote("s", "c", c)};
        const auto got = audit::resolve_majority("s", votes);
        const auto want = oracle::majority3({a, b, c});
        EXPECT_EQ(got.final_label, want);
        EXPECT_EQ(got.status, want ? ResolutionStatus::Resolved : ResolutionStatus::NeedsDiscussion);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 27);
}

TEST(Majority, Examples) {
  using V = Verdict;
  auto res = [](std::vector<V> vs) {
    std::vector<AnnotatorVote> votes;
    for (std::size_t i = 0; i < vs.size(); ++i) votes.push_back(vote("s", std::to_string(i), vs[i]));
    return audit::resolve_majority("s", votes);
  };
  EXPECT_EQ(res({V::Vulnerable, V::Vulnerable, V::NotVulnerable}).final_label, V::Vulnerable);
  EXPECT_EQ(res({V::NotVulnerable, V::NotVulnerable, V::Vulnerable}).final_label, V::NotVulnerable);
  EXPECT_EQ(res({V::Vulnerable, V::Unsure, V::Vulnerable}).status, ResolutionStatus::NeedsDiscussion);
  EXPECT_EQ(res({V::Vulnerable, V::Vulnerable}).status, ResolutionStatus::NeedsDiscussion);
}

TEST(Majority, CategoryIsMostCommonAmongDissent) {
  std::vector<AnnotatorVote> votes = {
      vote("s", "a", Verdict::NotVulnerable, ErrorCategory::RelevantConsistency),
      vote("s", "b", Verdict::NotVulnerable, ErrorCategory::RelevantConsistency),
      vote("s", "c", Verdict::NotVulnerable, ErrorCategory::Irrelevant)};
  EXPECT_EQ(audit::resolve_majority("s", votes).category, ErrorCategory::RelevantConsistency);
}

TEST(Majority, LargerPanel) {
  std::vector<AnnotatorVote> votes = {vote("s", "a", Verdict::Vulnerable),
                                      vote("s", "b", Verdict::Vulnerable),
                                      vote("s", "c", Verdict::NotVulnerable),
                                      vote("s", "d", Verdict::NotVulnerable),
                                      vote("s", "e", Verdict::Vulnerable)};
  EXPECT_EQ(audit::resolve_majority("s", votes, 5).final_label, Verdict::Vulnerable);
  votes.pop_back();
  EXPECT_EQ(audit::resolve_majority("s", votes, 4).status, ResolutionStatus::NeedsDiscussion);
}

TEST(MajorityProperty, ThirdVoteNeverUndoesAgreement) {
  const Verdict firm[] = {Verdict::Vulnerable, Verdict::NotVulnerable};
  for (auto agreed : firm) {
    for (auto third : firm) {
      std::vector<AnnotatorVote> votes = {vote("s", "a", agreed), vote("s", "b", agreed),
                                          vote("s", "c", third)};
      const auto r = audit::resolve_majority("s", votes);
      EXPECT_EQ(r.status, ResolutionStatus::Resolved);
      EXPECT_EQ(r.final_label, agreed);
    }
  }
}

TEST(Vote, Validation) {
  EXPECT_EQ(code_of([] { audit::validate_vote({"s", "a", Verdict::NotVulnerable, ErrorCategory::Correct}); }),
            Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { audit::validate_vote({"s", "a", Verdict::Vulnerable, ErrorCategory::Irrelevant}); }),
            Errc::InvalidArgument);
  EXPECT_NO_THROW(audit::validate_vote({"s", "a", Verdict::Unsure, ErrorCategory::Correct}));
}

std::vector<AuditResolution> resolutions(std::size_t correct, std::size_t total) {
  std::vector<AuditResolution> out;
  for (std::size_t i = 0; i < total; ++i) {
    AuditResolution r{"s" + std::to_string(i), Verdict::Vulnerable, ResolutionStatus::Resolved,
                      ErrorCategory::Correct};
    if (i >= correct) {
      r.final_label = Verdict::NotVulnerable;
      r.category = i % 2 ? ErrorCategory::MultiFunctionSpread : ErrorCategory::Irrelevant;
    }
    out.push_back(r);
  }
  return out;
}

TEST(AccuracyReport, FortySixOfFifty) {
  const auto rep = audit::accuracy_report(resolutions(46, 50));
  EXPECT_EQ(audit::format_percent(rep.correct_pct), "92.0");
  EXPECT_EQ(rep.breakdown.at(ErrorCategory::MultiFunctionSpread).count, 2u);
  EXPECT_EQ(rep.breakdown.at(ErrorCategory::Irrelevant).count, 2u);
  EXPECT_EQ(audit::format_percent(rep.breakdown.at(ErrorCategory::Irrelevant).percent), "4.0");
  EXPECT_NE(audit::format_report(rep).find("92.0"), std::string::npos);
}

TEST(AccuracyReport, FortyThreeOfFifty) {
  EXPECT_EQ(audit::format_percent(audit::accuracy_report(resolutions(43, 50)).correct_pct), "86.0");
}

TEST(AccuracyReport, AllCorrectHasEmptyBreakdown) {
  const auto rep = audit::accuracy_report(resolutions(50, 50));
  EXPECT_EQ(audit::format_percent(rep.correct_pct), "100.0");
  for (const auto& [_, share] : rep.breakdown) EXPECT_EQ(share.count, 0u);
  EXPECT_EQ(rep.breakdown.size(), 3u);
}

TEST(AccuracyReport, UnresolvedRejected) {
  auto rs = resolutions(3, 3);
  rs[1].status = ResolutionStatus::NeedsDiscussion;
  EXPECT_EQ(code_of([&] { audit::accuracy_report(rs); }), Errc::UnresolvedSamples);
}

TEST(Sampling, DeterministicDistinctAndBounded) {
  const auto a = audit::sample_indices(695, 50, 7);
  EXPECT_EQ(a, audit::sample_indices(695, 50, 7));
  EXPECT_NE(a, audit::sample_indices(695, 50, 8));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 50u);
  for (auto i : a) EXPECT_LT(i, 695u);
  auto all = audit::sample_indices(20, 20, 1);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(code_of([] { audit::sample_indices(3, 4, 0); }), Errc::InsufficientPopulation);
}

// Frozen draw so that a library change to the sampler shows up.
// Frozen from an independent mt19937_64 with rejection sampling.
TEST(Sampling, PinnedSequence) {
  EXPECT_EQ(audit::sample_indices(1000, 5, 42), (std::vector<std::size_t>{406, 249, 958, 58, 897}));
  EXPECT_EQ(audit::sample_indices(50, 10, 7),
            (std::vector<std::size_t>{15, 5, 32, 25, 17, 38, 7, 28, 41, 12}));
}

TEST(Sampling, DrawSampleBundlesContext) {
  std::vector<FunctionChangeRecord> recs;
  std::vector<LabeledFunction> labeled;
  for (int i = 0; i < 30; ++i) {
    auto r = testing::make_record("s", testing::hex_hash(i), i, "src/f.c", "fn" + std::to_string(i),
                                  "old" + std::to_string(i), "new" + std::to_string(i), true,
                                  "CVE-2020-" + std::to_string(1000 + i));
    recs.push_back(r);
    labeled.push_back(labeling::make_labeled(r, Version::PreCommit, Label::Vulnerable,
                                             i % 2 ? Labeler::OneFunc : Labeler::NVDCheck));
    labeled.push_back(labeling::make_labeled(r, Version::PostCommit, Label::Benign, Labeler::PostCommitBenign));
  }
  ingest::NvdFeed feed{{"CVE-2020-1003", {"CVE-2020-1003", "desc three", std::nullopt}}};
  const auto s = audit::draw_sample(labeled, recs, feed, 30, 5);
  ASSERT_EQ(s.size(), 30u);
  EXPECT_EQ(s[0].sample_id, "s0001");
  std::set<std::string> ids;
  for (const auto& x : s) {
    ids.insert(x.record_id);
    EXPECT_EQ(x.record_id.substr(x.record_id.size() - 4), "#pre");
    EXPECT_EQ(*x.code_after, "new" + x.function_name.substr(2));
    if (x.cve_id == "CVE-2020-1003") EXPECT_EQ(x.nvd_description, "desc three");
  }
  EXPECT_EQ(ids.size(), 30u);
  const auto only = audit::draw_sample(labeled, recs, feed, 15, 5, Labeler::OneFunc);
  for (const auto& x : only) EXPECT_TRUE(std::find(x.labelers.begin(), x.labelers.end(), Labeler::OneFunc) != x.labelers.end());
  EXPECT_EQ(code_of([&] { audit::draw_sample(labeled, recs, feed, 16, 5, Labeler::OneFunc); }),
            Errc::InsufficientPopulation);
}

TEST(Store, VoteRules) {
  audit::AuditStore store(samples(2));
  EXPECT_NO_THROW(store.record_vote(vote("s1000", "ann1", Verdict::Vulnerable)));
  EXPECT_EQ(code_of([&] { store.record_vote(vote("s1000", "ann1", Verdict::Unsure)); }), Errc::DuplicateVote);
  EXPECT_EQ(code_of([&] { store.record_vote(vote("nope", "ann1", Verdict::Unsure)); }), Errc::UnknownSample);
  EXPECT_EQ(code_of([&] { store.revise_vote(vote("s1000", "ann2", Verdict::Unsure)); }), Errc::UnknownVote);
  EXPECT_EQ(store.next_pending("ann1")->sample_id, "s1001");
  EXPECT_EQ(store.next_pending("ann2")->sample_id, "s1000");
  store.record_vote(vote("s1001", "ann1", Verdict::Vulnerable));
  EXPECT_FALSE(store.next_pending("ann1"));
}

TEST(Store, RevisionResolvesDiscussion) {
  audit::AuditStore store(samples(1));
  store.record_vote(vote("s1000", "a", Verdict::Vulnerable));
  store.record_vote(vote("s1000", "b", Verdict::Unsure));
  store.record_vote(vote("s1000", "c", Verdict::NotVulnerable));
  EXPECT_EQ(store.resolution("s1000").status, ResolutionStatus::NeedsDiscussion);
  EXPECT_EQ(code_of([&] { store.report(); }), Errc::UnresolvedSamples);
  store.revise_vote(vote("s1000", "b", Verdict::Vulnerable));
  EXPECT_EQ(store.resolution("s1000").final_label, Verdict::Vulnerable);
  EXPECT_EQ(audit::format_percent(store.report().correct_pct), "100.0");
}

TEST(Store, EventLogReplay) {
  TempLog log("replay");
  Rng rng(21);
  {
    auto store = audit::AuditStore::create(log.path, samples(10));
    EXPECT_EQ(code_of([&] { audit::AuditStore::create(log.path, samples(1)); }), Errc::Io);
    const Verdict all[] = {Verdict::Vulnerable, Verdict::NotVulnerable, Verdict::Unsure};
    for (const auto& s : store->samples()) {
      for (const char* who : {"a", "b", "c"}) {
        store->record_vote(vote(s.sample_id, who, all[rng.below(3)]));
      }
      if (rng.chance(0.5)) store->revise_vote(vote(s.sample_id, "b", Verdict::Vulnerable));
    }
  }
  audit::AuditStore memory(samples(10));
  auto reopened = audit::AuditStore::open(log.path);
  ASSERT_EQ(reopened->samples().size(), 10u);
  for (const auto& s : reopened->samples()) {
    const auto votes = reopened->votes(s.sample_id);
    EXPECT_EQ(votes.size(), 3u);
    EXPECT_EQ(reopened->resolution(s.sample_id), audit::resolve_majority(s.sample_id, votes));
  }
  // appends after reopening survive another replay
  reopened->revise_vote(vote("s1000", "a", Verdict::NotVulnerable, ErrorCategory::MultiFunctionSpread));
  reopened.reset();
  auto again = audit::AuditStore::open(log.path);
  EXPECT_EQ(again->votes("s1000")[0].verdict, Verdict::NotVulnerable);
}

TEST(Store, CorruptLogReportsLine) {
  TempLog log("corrupt");
  { audit::AuditStore::create(log.path, samples(1)); }
  {
    std::ofstream out(log.path, std::ios::app);
    out << R"({"event":"vote","vote":{"sample_id":"zzz","annotator_id":"a","verdict":"vulnerable"}})" << "\n";
  }
  try {
    audit::AuditStore::open(log.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownSample);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Store, ConcurrentVotesAreSerialized) {
  audit::AuditStore store(samples(50));
  std::vector<std::jthread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&store, t] {
      for (int i = 0; i < 50; ++i) {
        try {
          store.record_vote(vote("s" + std::to_string(1000 + i), "ann" + std::to_string(t % 3),
                                 Verdict::Vulnerable));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::DuplicateVote);
        }
      }
    });
  }
  threads.clear();
  for (const auto& s : store.samples()) EXPECT_EQ(store.votes(s.sample_id).size(), 3u);
  EXPECT_EQ(audit::format_percent(store.report().correct_pct), "100.0");
}

}  // namespace
}  // namespace vulncur
