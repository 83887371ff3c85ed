#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "decaylab/error.hpp"
#include "decaylab/majorize.hpp"

using namespace decaylab;

namespace {

std::vector<mpq_class> q(std::initializer_list<int> v) {
  std::vector<mpq_class> out;
  for (int x : v) out.emplace_back(x);
  return out;
}

SequencePair pair(std::vector<mpq_class> a, std::vector<mpq_class> b) { return {std::move(a), std::move(b)}; }

// independent recomputation: apply every permutation by hand
std::vector<mpq_class> apply(const AveragingMap& m, const std::vector<mpq_class>& a) {
  std::vector<mpq_class> out(a.size(), 0);
  for (const auto& e : m.entries)
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += e.weight * a[e.perm[i]];
  return out;
}

bool brute_dominance(const SequencePair& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    mpq_class sa = 0, sb = 0;
    for (std::size_t j = i; j < p.size(); ++j) {
      sa += p.a[j];
      sb += p.b[j];
    }
    if (sb < sa) return false;
  }
  return true;
}

void expect_valid_map(const AveragingMap& m, const SequencePair& p) {
  mpq_class total = 0;
  for (const auto& e : m.entries) {
    EXPECT_GT(e.weight, 0);
    total += e.weight;
    std::set<std::size_t> seen(e.perm.begin(), e.perm.end());
    EXPECT_EQ(seen.size(), p.size());
    EXPECT_LT(*seen.rbegin(), p.size());
  }
  EXPECT_EQ(total, 1);
  const auto avg = apply(m, p.a);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_GE(p.b[i], avg[i]) << "index " << i;
}

}  // namespace

TEST(TailDominance, SmallExamples) {
  EXPECT_TRUE(check_tail_dominance(pair(q({3, 1, 0}), q({2, 2, 0}))));
  EXPECT_TRUE(check_tail_dominance(pair(q({4, 2, 1}), q({4, 2, 1}))));
  EXPECT_FALSE(check_tail_dominance(pair(q({2, 0}), q({1, 0}))));
}

TEST(TailDominance, Validation) {
  EXPECT_THROW(pair(q({1, 2}), q({2, 2})).validate(), PreconditionError);
  EXPECT_THROW(pair(q({1, 0}), q({1})).validate(), PreconditionError);
  EXPECT_THROW(pair(q({0, -1}), q({0, 0})).validate(), PreconditionError);
}

TEST(AveragingMap, EvenSplitOfTwoEntries) {
  const auto p = pair(q({1, 0}), {mpq_class(1, 2), mpq_class(1, 2)});
  const auto m = build_averaging_map(p);
  ASSERT_EQ(m.entries.size(), 2u);
  for (const auto& e : m.entries) EXPECT_EQ(e.weight, mpq_class(1, 2));
  expect_valid_map(m, p);
  EXPECT_TRUE(m.verify(p));
}

TEST(AveragingMap, EqualSequencesGiveIdentity) {
  const auto p = pair(q({5, 3, 3, 1}), q({5, 3, 3, 1}));
  const auto m = build_averaging_map(p);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].weight, 1);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(m.entries[0].perm[i], i);
}

TEST(AveragingMap, SingleEntry) {
  const auto p = pair(q({2}), q({3}));
  const auto m = build_averaging_map(p);
  expect_valid_map(m, p);
  EXPECT_EQ(m.n, 1u);
}

TEST(AveragingMap, ThreeEntryExample) {
  const auto p = pair(q({3, 1, 0}), q({2, 2, 0}));
  const auto m = build_averaging_map(p);
  expect_valid_map(m, p);
}

TEST(AveragingMap, RejectsCapAndNonDominance) {
  std::vector<mpq_class> a(13, 1);
  EXPECT_THROW(build_averaging_map(pair(a, a)), PreconditionError);
  EXPECT_NO_THROW(build_averaging_map(pair(a, a), {13}));
  EXPECT_THROW(build_averaging_map(pair(q({2, 0}), q({1, 0}))), PreconditionError);
}

TEST(AveragingMap, VerifyCatchesTamperedWeights) {
  const auto p = pair(q({1, 0}), {mpq_class(1, 2), mpq_class(1, 2)});
  auto m = build_averaging_map(p);
  m.entries[0].weight = mpq_class(3, 4);
  EXPECT_FALSE(m.verify(p));
}

TEST(AveragingMap, TextFormat) {
  const auto p = pair(q({1, 0}), {mpq_class(1, 2), mpq_class(1, 2)});
  const auto text = build_averaging_map(p).to_text();
  EXPECT_EQ(text.rfind("# averaging map n=2 entries=2\n", 0), 0u);
  EXPECT_NE(text.find("1/2 1 2\n"), std::string::npos);
  EXPECT_NE(text.find("1/2 2 1\n"), std::string::npos);
}

TEST(JensenChain, SqrtSumsAreOrdered) {
  const auto p = pair(q({3, 1, 0}), q({2, 2, 0}));
  const auto m = build_averaging_map(p);
  const auto c = jensen_sqrt_certificate(p, m);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.sum_a, std::sqrt(3.0) + 1.0, 1e-15);
  EXPECT_NEAR(c.sum_b, 2 * std::sqrt(2.0), 1e-15);
  EXPECT_GE(c.sum_b, c.sum_average - c.slack);
  EXPECT_GE(c.sum_average, c.sum_a - c.slack);
}

TEST(JensenChain, CustomConcaveFunction) {
  const auto p = pair(q({4, 0}), q({2, 2}));
  const auto m = build_averaging_map(p);
  const auto c = jensen_sqrt_certificate(p, m, [](double x) { return std::log1p(x); });
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.sum_b, 2 * std::log(3.0), 1e-15);
}

TEST(MajorizeFuzz, RandomDominatedPairsAlwaysGetAVerifiedMap) {
  RandomPairOptions ro;
  std::size_t max_support = 0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    CounterRng rng(99, k);
    const auto p = random_dominated_pair(rng, ro);
    ASSERT_TRUE(brute_dominance(p)) << "trial " << k;
    const auto m = build_averaging_map(p);
    ASSERT_TRUE(m.verify(p)) << "trial " << k;
    const auto avg = apply(m, p.a);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_GE(p.b[i], avg[i]) << "trial " << k;
    ASSERT_TRUE(jensen_sqrt_certificate(p, m).holds) << "trial " << k;
    max_support = std::max(max_support, m.entries.size());
  }
  EXPECT_GT(max_support, 1u);
}
