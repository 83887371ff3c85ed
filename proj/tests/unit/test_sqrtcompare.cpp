#include <gtest/gtest.h>

#include <cmath>

#include "decaylab/error.hpp"
#include "decaylab/sqrtcompare.hpp"

using namespace decaylab;

namespace {

DecayCurve expo(double rate) { return make_named_curve(CurveFamily::exponential, {{"rate", rate}}); }

// 1 - t/2 on [0, 1], then e^{1-t}/2: C^1 and convex
DecayCurve kinked() {
  CurveFns fns;
  fns.eval = [](double t) { return t <= 1.0 ? 1.0 - 0.5 * t : 0.5 * std::exp(1.0 - t); };
  fns.deriv = [](double t) { return t < 1.0 ? -0.5 : -0.5 * std::exp(1.0 - t); };
  fns.breakpoints = {1.0};
  CurveFlags fl;
  fl.monotone_decreasing = fl.convex = fl.limit_zero = FlagState::asserted;
  return DecayCurve("kinked", fns, 0.0, fl);
}

}  // namespace

TEST(Increments, ExponentialCellsAndLumpedTail) {
  const auto inc = discretize_increments(expo(1.0), 2.0, 2);
  ASSERT_EQ(inc.a.size(), 3u);
  EXPECT_NEAR(inc.a[0], 1 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(inc.a[1], std::exp(-1.0) - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(inc.a[2], std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(inc.h, 1.0);
  EXPECT_TRUE(inc.tail_ordered);
}

TEST(Increments, ZeroCurve) {
  const auto z = make_named_curve(CurveFamily::constant, {{"value", 0.0}});
  const auto inc = discretize_increments(z, 3.0, 4);
  for (double x : inc.a) EXPECT_EQ(x, 0.0);
}

TEST(Increments, Rejections) {
  EXPECT_THROW(discretize_increments(expo(1.0), 2.0, 0), PreconditionError);
  EXPECT_THROW(discretize_increments(expo(1.0), 0.0, 2), PreconditionError);
  CurveFns fns;
  fns.eval = [](double t) { return std::exp(-t); };
  fns.deriv = [](double t) { return -std::exp(-t); };
  EXPECT_THROW(discretize_increments(DecayCurve("unflagged", fns, 0.0, {}), 2.0, 2), PreconditionError);
}

TEST(SqrtCompare, IdenticalCurvesTie) {
  const auto r = compare_sqrt_integrals(expo(1.0), expo(1.0), 2.0, 2);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.tail_dominance);
  EXPECT_EQ(r.sum_sqrt_a, r.sum_sqrt_b);
  EXPECT_EQ(r.certificate, Certificate::majorization);
}

TEST(SqrtCompare, SlowerDecayHasLargerSqrtSum) {
  const auto r = compare_sqrt_integrals(expo(2.0), expo(1.0), 5.0, 100);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.tail_dominance);
  EXPECT_EQ(r.certificate, Certificate::direct);  // 101 entries exceed the map cap
  EXPECT_GT(r.sum_sqrt_b, r.sum_sqrt_a);
  // int_0^T e^{-t/2} = 2 (1 - e^{-T/2})
  const double exact = 2 * (1 - std::exp(-2.5));
  EXPECT_LE(std::abs(r.riemann_G - exact), r.riemann_error_G + 1e-12);
}

TEST(SqrtCompare, SmallCaseIsCertifiedByAveragingMap) {
  // h = 1 keeps both lumped tails below the last cell increment
  const auto r = compare_sqrt_integrals(expo(2.0), expo(1.0), 5.0, 5);
  EXPECT_EQ(r.certificate, Certificate::majorization);
  EXPECT_GT(r.map_entries, 0u);
  EXPECT_TRUE(r.holds);
}

TEST(SqrtCompare, RejectsGBelowG) {
  EXPECT_THROW(compare_sqrt_integrals(expo(1.0), expo(2.0), 5.0, 10), PreconditionError);
}

TEST(SqrtCompare, OutOfOrderLumpedTailCanFail) {
  const auto g = kinked();
  const auto G = max_curve(make_named_curve(CurveFamily::linear_cutoff, {{"rate", 0.1}}), expo(0.5));
  const auto r = compare_sqrt_integrals(g, G, 1.0, 1);
  EXPECT_NEAR(r.a.a[0], 0.5, 1e-15);
  EXPECT_NEAR(r.a.a[1], 0.5, 1e-15);
  EXPECT_NEAR(r.b.a[0], 0.1, 1e-15);
  EXPECT_NEAR(r.b.a[1], 0.9, 1e-15);
  EXPECT_FALSE(r.b.tail_ordered);
  EXPECT_TRUE(r.tail_dominance);
  EXPECT_EQ(r.certificate, Certificate::direct);
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.sum_sqrt_b, std::sqrt(0.1) + std::sqrt(0.9), 1e-14);
}

TEST(SqrtFuzz, SerialAndParallelAgree) {
  FuzzOptions fo;
  fo.trials = 400;
  fo.max_N = 32;
  fo.seed = 5;
  fo.mode = FuzzMode::max;
  fo.exec = Exec::serial;
  const auto s = fuzz_counterexample_search(fo).to_json();
  fo.exec = Exec::parallel;
  const auto p = fuzz_counterexample_search(fo).to_json();
  EXPECT_EQ(s.dump(), p.dump());
}

TEST(SqrtFuzz, BumpModeHasNoFailures) {
  FuzzOptions fo;
  fo.trials = 2000;
  fo.seed = 3;
  const auto r = fuzz_counterexample_search(fo);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.tail_order_failures, 0u);
  EXPECT_GT(r.majorization_certified, 0u);
}

TEST(SqrtFuzz, MaxModeOrderedPairsNeverFail) {
  FuzzOptions fo;
  fo.trials = 2000;
  fo.seed = 4;
  fo.mode = FuzzMode::max;
  const auto r = fuzz_counterexample_search(fo);
  EXPECT_EQ(r.violations, 0u);
  for (const auto& rp : r.reproducers) EXPECT_LT(rp.sum_sqrt_b, rp.sum_sqrt_a);
}

TEST(RandomCurves, ConvexDecreasingOnAGrid) {
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto c = random_convex_curve(17, k);
    double prev = c(0.0), prev_inc = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i) {
      const double v = c(0.1 * i);
      EXPECT_LE(v, prev + 1e-15);
      EXPECT_LE(prev - v, prev_inc + 1e-13);
      prev_inc = prev - v;
      prev = v;
    }
  }
}

TEST(Barrier, GrowsWhileTheCurveStaysIntegrable) {
  const double alpha = 1.5;
  const auto r = barrier_experiment(alpha, 1e2, 1e4, 0.25, Exec::serial);
  EXPECT_GT(r.growth, 0.0);
  const double Thi = 1e4;
  const double exact = (std::pow(std::log(2.0), 1 - alpha) - std::pow(std::log(Thi), 1 - alpha)) / (alpha - 1);
  EXPECT_NEAR(r.integral_hi, exact, 1e-8 * exact);
  EXPECT_NEAR(r.integral_closed_form, std::pow(std::log(2.0), -0.5) / 0.5, 1e-12);
  EXPECT_THROW(barrier_experiment(1.0, 10, 100), PreconditionError);
}
