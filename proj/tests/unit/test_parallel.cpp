#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "decaylab/parallel.hpp"
#include "decaylab/rng.hpp"

using namespace decaylab;

namespace {

std::uint64_t bits(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return u;
}

}  // namespace

TEST(ChunkedSum, SerialAndParallelAgreeBitwise) {
  for (std::size_t n : {0u, 1u, 7u, 255u, 256u, 257u, 100000u}) {
    auto term = [](std::size_t i) { return std::sin(double(i)) / (1.0 + double(i)); };
    const double s = chunked_sum(n, Exec::serial, term);
    for (int threads : {1, 2, 3, 8}) {
      set_thread_count(threads);
      EXPECT_EQ(bits(s), bits(chunked_sum(n, Exec::parallel, term))) << "n=" << n << " threads=" << threads;
    }
  }
  set_thread_count(1);
}

TEST(ChunkedSum, MatchesNaiveSumClosely) {
  const std::size_t n = 10000;
  double naive = 0.0;
  for (std::size_t i = 0; i < n; ++i) naive += 1.0 / double((i + 1) * (i + 1));
  EXPECT_NEAR(chunked_sum(n, Exec::serial, [](std::size_t i) { return 1.0 / double((i + 1) * (i + 1)); }), naive,
              1e-13);
}

TEST(ParallelFor, RethrowsTheLowestIndexFailure) {
  set_thread_count(4);
  try {
    parallel_for(100, Exec::parallel, [](std::size_t i) {
      if (i == 17 || i == 80) throw std::runtime_error("bad " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "bad 17");
  }
  set_thread_count(1);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  set_thread_count(3);
  parallel_for(hits.size(), Exec::parallel, [&](std::size_t i) { hits[i] += 1; });
  set_thread_count(1);
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(CounterRng, StreamIsAPureFunctionOfSeedStreamAndCounter) {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
  EXPECT_EQ(a.counter(), 100u);
}

TEST(CounterRng, MomentsOfTheNoiseModels) {
  CounterRng r(1, 0);
  const int n = 200000;
  double su = 0, sr = 0, sr2 = 0, sg = 0, sg2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.rademacher();
    ASSERT_TRUE(z == 1.0 || z == -1.0);
    sr += z;
    sr2 += z * z;
    const double g = r.gaussian();
    sg += g;
    sg2 += g * g;
  }
  // 5 standard errors
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sr / n, 0.0, 5 / std::sqrt(double(n)));
  EXPECT_EQ(sr2, double(n));
  EXPECT_NEAR(sg / n, 0.0, 5 / std::sqrt(double(n)));
  EXPECT_NEAR(sg2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}
