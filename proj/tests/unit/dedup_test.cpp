#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gen.hpp"
#include "oracles.hpp"
#include "vulncur/dedup.hpp"
#include "vulncur/error.hpp"
#include "vulncur/labeling.hpp"

namespace vulncur {
namespace {

using testing::make_record;
using testing::Rng;

// hashlib.md5(s.encode()).hexdigest()
TEST(Md5, KnownVectors) {
  EXPECT_EQ(dedup::md5_hex(""), "d41d8cd98f00b204e9800998ecf8427e");
  EXPECT_EQ(dedup::md5_hex("a"), "0cc175b9c0f1b6a831c399e269772661");
  EXPECT_EQ(dedup::md5_hex("abc"), "900150983cd24fb0d6963f7d28e17f72");
  EXPECT_EQ(dedup::md5_hex("message digest"), "f96b697d7cb7938d525a2f31aaf161d0");
  EXPECT_EQ(dedup::md5_hex("ab"), "187ef4436122d1cc2f40dc2b92f0eba0");
  EXPECT_EQ(dedup::md5_hex("ba"), "07159c47ee1b19ae4fb9c40d480856c4");
}

TEST(Normalize, RemovesExactlyFourCharacters) {
  EXPECT_EQ(dedup::normalize("int main() {\n\treturn 0;\r\n}"), "intmain(){return0;}");
  EXPECT_EQ(dedup::normalize("a\vb\fc"), "a\vb\fc");
  EXPECT_EQ(dedup::normalize(" \t\r\n"), "");
  EXPECT_EQ(dedup::digest("int main() {\n\treturn 0;\r\n}").hex(),
            "260c9ad5fc96f9d520c8d470e48a41bd");
}

TEST(Normalize, TabsVersusSpacesCollide) {
  EXPECT_EQ(dedup::digest("a\tb"), dedup::digest("a    b"));
  EXPECT_NE(dedup::digest("ab"), dedup::digest("ba"));
}

TEST(DropUnchanged, Cases) {
  EXPECT_TRUE(dedup::drop_unchanged(make_record("s", "ab", 1, "a.c", "f", "x y", "x\ty")));
  EXPECT_FALSE(dedup::drop_unchanged(make_record("s", "ab", 1, "a.c", "f", "x", "y")));
  EXPECT_TRUE(dedup::drop_unchanged(make_record("s", "ab", 1, "a.c", "f", "x", "x", false)));
  EXPECT_FALSE(dedup::drop_unchanged(make_record("s", "ab", 1, "a.c", "f", "x", std::nullopt)));
  try {
    dedup::drop_unchanged(make_record("s", "ab", 1, "a.c", "f", std::nullopt, std::nullopt));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingVersion);
  }
}

TEST(DedupCorpus, TabsVersusSpacesSecondPreDiscarded) {
  std::vector<FunctionChangeRecord> recs = {
      make_record("s", "bb", 2, "b.c", "g", "int\tx;", "int y;"),
      make_record("s", "aa", 1, "a.c", "f", "int x;", "int z;"),
  };
  const auto out = dedup::dedup_corpus(recs);
  ASSERT_EQ(out.records.size(), 2u);
  EXPECT_EQ(out.records[0].commit_hash, "aa");
  EXPECT_TRUE(out.records[0].code_before);
  EXPECT_FALSE(out.records[1].code_before);
  EXPECT_TRUE(out.records[1].code_after);
  EXPECT_EQ(out.report, (dedup::DedupReport{3, 0, 1}));
}

TEST(DedupCorpus, AllDistinctIsIdentity) {
  std::vector<FunctionChangeRecord> recs = {
      make_record("s", "aa", 1, "a.c", "f", "a", "b"),
      make_record("s", "aa", 1, "a.c", "g", "c", "c", false),
      make_record("s", "bb", 2, "a.c", "f", "d", "e"),
  };
  const auto out = dedup::dedup_corpus(recs);
  EXPECT_EQ(out.records, recs);
  EXPECT_EQ(out.report, (dedup::DedupReport{5, 0, 0}));
}

TEST(DedupCorpus, WhitespaceOnlyChangeDropped) {
  std::vector<FunctionChangeRecord> recs = {make_record("s", "aa", 1, "a.c", "f", "a b", "ab\n")};
  const auto out = dedup::dedup_corpus(recs);
  EXPECT_TRUE(out.records.empty());
  EXPECT_EQ(out.report, (dedup::DedupReport{0, 1, 0}));
}

TEST(DedupCorpus, ThousandFunctionsHundredPlants) {
  const auto corpus = testing::synthetic_corpus(42);
  ASSERT_EQ(corpus.records.size(), 1000u);
  ASSERT_EQ(corpus.planted, 100u);
  const auto out = dedup::dedup_corpus(corpus.records);
  EXPECT_EQ(out.report.dropped_duplicate, 100u);
  EXPECT_EQ(out.report.dropped_unchanged, 0u);
  // 200 changed records with two versions, 800 unchanged with one
  EXPECT_EQ(out.report.kept, 1200u - 100u);
}

std::vector<FunctionChangeRecord> random_corpus(Rng& rng, std::size_t max_records) {
  std::vector<FunctionChangeRecord> recs;
  const auto n = 1 + rng.below(max_records);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = rng.below(n / 3 + 1);
    const bool changed = rng.chance(0.6);
    std::optional<std::string> before = testing::colliding_code(rng);
    std::optional<std::string> after = changed ? testing::colliding_code(rng) : *before;
    if (changed && rng.chance(0.15)) (rng.chance(0.5) ? before : after).reset();
    if (rng.chance(0.3) && before) before = testing::whitespace_variant(rng, *before);
    if (!changed) after = before;
    recs.push_back(make_record("s", testing::hex_hash(c), static_cast<Timestamp>(c % 5), "f.c",
                               "fn" + std::to_string(i), before, after, changed));
  }
  return recs;
}

TEST(DedupProperty, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int round = 0; round < 100; ++round) {
    const auto recs = random_corpus(rng, 120);
    const auto got = dedup::dedup_corpus(recs, 1 + round % 4);
    const auto want = oracle::dedup(recs);
    ASSERT_EQ(got.records, want.records) << "round " << round;
    EXPECT_EQ(got.report.kept, want.kept);
    EXPECT_EQ(got.report.dropped_unchanged, want.dropped_unchanged);
    EXPECT_EQ(got.report.dropped_duplicate, want.dropped_duplicate);
  }
}

TEST(DedupProperty, RetainedVersionsHaveDistinctDigests) {
  Rng rng(99);
  for (int round = 0; round < 50; ++round) {
    const auto out = dedup::dedup_corpus(random_corpus(rng, 150));
    std::set<std::string> seen;
    std::size_t versions = 0;
    for (const auto& r : out.records) {
      if (!r.changed) {
        ++versions;
        EXPECT_TRUE(seen.insert(dedup::normalize(*r.code_before)).second);
        continue;
      }
      for (const auto& v : {r.code_before, r.code_after}) {
        if (!v) continue;
        ++versions;
        EXPECT_TRUE(seen.insert(dedup::normalize(*v)).second);
      }
    }
    EXPECT_EQ(versions, out.report.kept);
  }
}

TEST(DedupProperty, PermutationIndependent) {
  Rng rng(8);
  for (int round = 0; round < 30; ++round) {
    auto recs = random_corpus(rng, 100);
    const auto base = dedup::dedup_corpus(recs);
    std::shuffle(recs.begin(), recs.end(), rng.engine());
    const auto shuffled = dedup::dedup_corpus(recs, 4);
    EXPECT_EQ(base.records, shuffled.records);
    EXPECT_EQ(base.report, shuffled.report);
  }
}

TEST(DuplicateFlags, MatchesAllPairsComparison) {
  Rng rng(31);
  for (int round = 0; round < 100; ++round) {
    std::vector<std::string> texts;
    const auto n = rng.below(300);
    for (std::size_t i = 0; i < n; ++i) {
      texts.push_back(rng.chance(0.3) && !texts.empty()
                          ? testing::whitespace_variant(rng, rng.pick(texts))
                          : testing::colliding_code(rng, 4));
    }
    const auto flags = dedup::duplicate_flags(texts);
    for (std::size_t i = 0; i < n; ++i) {
      bool dup = false;
      for (std::size_t j = 0; j < i; ++j) dup = dup || oracle::strip(texts[j]) == oracle::strip(texts[i]);
      ASSERT_EQ(flags[i], dup);
    }
  }
}

LabeledFunction labeled(const std::string& name, const std::string& code, Label label) {
  const auto r = make_record("s", "ab", 1, "a.c", name, code, code + ";");
  return labeling::make_labeled(r, Version::PreCommit, label,
                                label == Label::Vulnerable ? Labeler::OneFunc
                                                           : Labeler::UnchangedBenign);
}

TEST(Leakage, DisjointIsZeroAndFullIsHundred) {
  const std::vector<LabeledFunction> train = {labeled("a", "x", Label::Vulnerable),
                                              labeled("b", "y", Label::Benign)};
  const std::vector<LabeledFunction> disjoint = {labeled("c", "z", Label::Vulnerable)};
  EXPECT_EQ(dedup::leakage_report(train, disjoint), 0.0);
  const std::vector<LabeledFunction> copied = {labeled("c", " x", Label::Vulnerable),
                                               labeled("d", "y\n", Label::Vulnerable)};
  EXPECT_EQ(dedup::leakage_report(train, copied), 100.0);
  const std::vector<LabeledFunction> half = {labeled("c", "x", Label::Vulnerable),
                                             labeled("d", "w", Label::Vulnerable),
                                             labeled("e", "y", Label::Benign)};
  EXPECT_EQ(dedup::leakage_report(train, half), 50.0);
  EXPECT_EQ(dedup::leakage_report(train, {}), 0.0);
}

}  // namespace
}  // namespace vulncur
