#include <gtest/gtest.h>

#include "gen.hpp"
#include "oracles.hpp"
#include "vulncur/labeling.hpp"
#include "vulncur/pairing.hpp"

namespace vulncur {
namespace {

using testing::Rng;

TEST(Lcs, AbcdAbed) {
  EXPECT_EQ(oracle::lcs_brute("abcd", "abed"), 3u);
  EXPECT_EQ(pairing::lcs_length("abcd", "abed"), 3u);
  EXPECT_DOUBLE_EQ(pairing::similarity("abcd", "abed"), 0.75);
  EXPECT_DOUBLE_EQ(oracle::similarity("abcd", "abed"), 0.75);
}

TEST(Similarity, Basics) {
  EXPECT_EQ(pairing::similarity("int f() { return 1; }", "int f() { return 1; }"), 1.0);
  EXPECT_EQ(pairing::similarity("abc", "xyz"), 0.0);
  EXPECT_EQ(pairing::similarity("", " \n"), 1.0);
  EXPECT_EQ(pairing::similarity("", "a"), 0.0);
  EXPECT_EQ(pairing::similarity("a b\tc", "abc"), 1.0);
}

TEST(Lcs, OracleOnSmallStrings) {
  Rng rng(1);
  for (int i = 0; i < 3000; ++i) {
    std::string a, b;
    const auto na = rng.below(9);
    const auto nb = rng.below(9);
    for (std::size_t k = 0; k < na; ++k) a.push_back(static_cast<char>('a' + rng.below(3)));
    for (std::size_t k = 0; k < nb; ++k) b.push_back(static_cast<char>('a' + rng.below(3)));
    ASSERT_EQ(oracle::lcs_dp(a, b), oracle::lcs_brute(a, b));
    ASSERT_EQ(pairing::lcs_length(a, b), oracle::lcs_dp(a, b)) << a << " / " << b;
  }
}

TEST(Lcs, BitParallelMatchesDpAcrossWordBoundaries) {
  Rng rng(2);
  for (int i = 0; i < 400; ++i) {
    std::string a, b;
    const auto na = rng.below(300);
    const auto nb = rng.below(300);
    const auto alphabet = 1 + rng.below(rng.chance(0.5) ? 4 : 200);
    for (std::size_t k = 0; k < na; ++k) a.push_back(static_cast<char>(1 + rng.below(alphabet)));
    for (std::size_t k = 0; k < nb; ++k) b.push_back(static_cast<char>(1 + rng.below(alphabet)));
    ASSERT_EQ(pairing::lcs_length(a, b), oracle::lcs_dp(a, b));
    ASSERT_EQ(pairing::lcs_length(b, a), oracle::lcs_dp(a, b));
  }
  // exact multiples of the word size
  for (std::size_t n : {63u, 64u, 65u, 128u, 129u}) {
    const std::string a(n, 'x');
    std::string b = a;
    b[n / 2] = 'y';
    EXPECT_EQ(pairing::lcs_length(a, b), n - 1);
    EXPECT_EQ(pairing::lcs_length(a, a), n);
  }
}

TEST(SimilarityProperty, SymmetricAndBounded) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto a = testing::colliding_code(rng, 10);
    const auto b = testing::colliding_code(rng, 10);
    const double s = pairing::similarity(a, b);
    EXPECT_EQ(s, pairing::similarity(b, a));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s, oracle::similarity(a, b));
  }
}

struct Fixture {
  std::vector<LabeledFunction> labeled;
  DatasetSplit split;
};

Fixture fixture() {
  using testing::make_record;
  Fixture fx;
  const std::vector<FunctionChangeRecord> recs = {
      make_record("s", "aa", 1, "a.c", "ws", "int f(){return 1;}", "int f() {\n  return 1;\n}"),
      make_record("s", "aa", 1, "a.c", "abcd", "abcd", "abed"),
      make_record("s", "bb", 2, "a.c", "gone", "int g(){}", std::nullopt),
      make_record("s", "cc", 3, "a.c", "near", "int h(int x){return x+1;}",
                  "int h(int x){return x+2;}"),
  };
  for (const auto& r : recs) {
    fx.labeled.push_back(labeling::make_labeled(r, Version::PreCommit, Label::Vulnerable, Labeler::OneFunc));
    fx.split.assignment[fx.labeled.back().id] = r.commit_hash == "cc" ? SplitName::Test : SplitName::Train;
    if (r.code_after) {
      fx.labeled.push_back(
          labeling::make_labeled(r, Version::PostCommit, Label::Benign, Labeler::PostCommitBenign));
      fx.split.assignment[fx.labeled.back().id] = r.commit_hash == "cc" ? SplitName::Test : SplitName::Train;
    }
  }
  return fx;
}

TEST(BuildPairs, Fixture) {
  const auto fx = fixture();
  const auto out = pairing::build_pairs(fx.labeled, fx.split);
  ASSERT_EQ(out.pairs.size(), 2u);
  EXPECT_EQ(out.pairs[0].vulnerable_id, labeled_id(make_record_id("s", "aa", "a.c", "ws"), Version::PreCommit));
  EXPECT_EQ(out.pairs[0].benign_id, labeled_id(make_record_id("s", "aa", "a.c", "ws"), Version::PostCommit));
  EXPECT_EQ(out.pairs[0].similarity, 1.0);
  EXPECT_EQ(out.report.vulnerable, 4u);
  EXPECT_EQ(out.report.without_patch, 1u);
  EXPECT_EQ(out.report.below_threshold, 1u);
  EXPECT_EQ(out.report.per_split[0], 1u);
  EXPECT_EQ(out.report.per_split[2], 1u);
  for (const auto& p : out.pairs) {
    const auto* v = &*std::find_if(fx.labeled.begin(), fx.labeled.end(), [&](auto& f) { return f.id == p.vulnerable_id; });
    const auto* b = &*std::find_if(fx.labeled.begin(), fx.labeled.end(), [&](auto& f) { return f.id == p.benign_id; });
    EXPECT_GE(oracle::similarity(v->code, b->code), 0.8);
    EXPECT_EQ(v->record_id, b->record_id);
  }
}

TEST(BuildPairs, ThresholdIsConfigurable) {
  const auto fx = fixture();
  EXPECT_EQ(pairing::build_pairs(fx.labeled, fx.split, 0.75).pairs.size(), 3u);
  EXPECT_EQ(pairing::build_pairs(fx.labeled, fx.split, 0.75, 4).pairs,
            pairing::build_pairs(fx.labeled, fx.split, 0.75, 1).pairs);
}

}  // namespace
}  // namespace vulncur
