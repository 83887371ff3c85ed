#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "decaylab/error.hpp"
#include "decaylab/flows.hpp"
#include "decaylab/objective.hpp"
#include "decaylab/verify.hpp"

using namespace decaylab;

namespace {

GradientFlowOptions tight(SampleSchedule s) {
  GradientFlowOptions fo;
  fo.rtol = 1e-10;
  fo.atol = 1e-14;
  fo.schedule = std::move(s);
  return fo;
}

// x^2/4 from x0 = 2: x = 2 e^{-t/2}, f = e^{-t}
Trajectory half_quadratic_flow(double t_end, double dt = 0.25) {
  static const QuadraticObjective obj({0.5});
  return integrate_gradient_flow(obj, {2.0}, t_end, tight(SampleSchedule::uniform(dt)));
}

// x^4/64 from x0 = 2 sqrt 2: x^2 = 8/(1+t), f = 1/(1+t)^2
Trajectory quartic_flow(double t_end) {
  static const PowerObjective obj(1.0 / 64, 4.0);
  return integrate_gradient_flow(obj, {2 * std::numbers::sqrt2}, t_end,
                                 tight(SampleSchedule::geometric(1e-3, 1.02, 0.5)));
}

Trajectory hand_made(std::vector<double> ts, std::vector<double> xs, std::vector<double> fs, std::string kind = "test") {
  TrajectoryMeta m;
  m.kind = std::move(kind);
  m.xstar = std::vector<double>{0.0};
  Trajectory tr(1, false, m);
  for (std::size_t i = 0; i < ts.size(); ++i) tr.push(ts[i], std::vector<double>{xs[i]}, fs[i], 0.0);
  return tr;
}

// e^{-x}: convex, decreasing, infimum 0 never attained
class ExpDecay final : public Objective {
 public:
  std::size_t dim() const override { return 1; }
  double value(std::span<const double> x) const override { return std::exp(-x[0]); }
  void gradient(std::span<const double> x, std::span<double> g) const override { g[0] = -std::exp(-x[0]); }
  std::string id() const override { return "exp_decay"; }
};

}  // namespace

TEST(LyapunovGf, MatchesClosedFormAndDecreases) {
  const auto tr = half_quadratic_flow(10.0);
  const auto r = lyapunov_gf(tr);
  EXPECT_EQ(r.overall(), Verdict::pass);
  EXPECT_NEAR(r.values.at("L0"), 2.0, 1e-12);
  for (const auto& p : r.series) {
    const double L = p.t * std::exp(-p.t) + 2 * std::exp(-p.t);
    EXPECT_NEAR(p.lhs, L, 1e-7 * L);
  }
  const auto* c = r.child("excess_le_L0_over_t");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->verdict, Verdict::pass);
}

TEST(LyapunovGf, IncreasingFunctionalFails) {
  const auto tr = hand_made({0, 1, 2}, {1.0, 0.5, 0.9}, {0.5, 0.125, 0.4});
  EXPECT_EQ(lyapunov_gf(tr, 1e-12).verdict, Verdict::fail);
}

TEST(LyapunovGf, NeedsMinimizer) {
  auto tr = hand_made({0, 1}, {1, 0.5}, {1, 0.5});
  tr.meta().xstar.reset();
  EXPECT_THROW(lyapunov_gf(tr), PreconditionError);
}

TEST(ExcessIntegral, QuarticFlowIntegratesToOne) {
  const auto tr = quartic_flow(1000.0);
  const auto r = excess_integral(tr, ExcessWeight::one);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_NEAR(r.values.at("bound"), 4.0, 1e-12);
  // int_0^T (1+t)^{-2} dt = 1 - 1/(1+T)
  EXPECT_NEAR(r.values.at("integral"), 1.0 - 1.0 / 1001.0, 1e-4);
}

TEST(ExcessIntegral, TWeightConstantAndAlphaGuard) {
  auto tr = hand_made({0, 1}, {1, 0}, {0.5, 0});
  const auto r = excess_integral(tr, ExcessWeight::t, 5.0);
  EXPECT_DOUBLE_EQ(r.values.at("constant"), 16.0 / 4.0);
  EXPECT_THROW(excess_integral(tr, ExcessWeight::t, 3.0), PreconditionError);
  EXPECT_THROW(excess_integral(tr, ExcessWeight::t), PreconditionError);
}

TEST(DecayProducts, TExcessTailBelowThreshold) {
  const auto tr = quartic_flow(1000.0);
  const auto r = decay_products(tr, ProductWeight::t, {1e-2, LimitMode::lim, 10.0, 0.1});
  EXPECT_EQ(r.verdict, Verdict::pass);
  // t/(1+t)^2 is decreasing on the tail, so its sup sits at the first tail sample
  const double t0 = r.series.front().t;
  EXPECT_GE(t0, 100.0);
  EXPECT_NEAR(r.values.at("tail_sup"), t0 / ((1 + t0) * (1 + t0)), 1e-8);
}

TEST(DecayProducts, HarmonicExcessFailsLim) {
  std::vector<double> ts, xs, fs;
  for (int i = 1; i <= 200; ++i) {
    ts.push_back(i);
    xs.push_back(1.0 / i);
    fs.push_back(1.0 / i);
  }
  const auto tr = hand_made(ts, xs, fs);
  EXPECT_EQ(decay_products(tr, ProductWeight::t).verdict, Verdict::fail);
}

TEST(DecayProducts, LiminfIsNeverFailed) {
  std::vector<double> ts, xs, fs;
  for (int i = 1; i <= 200; ++i) {
    ts.push_back(i);
    xs.push_back(1.0);
    fs.push_back(1.0);
  }
  const auto tr = hand_made(ts, xs, fs);
  EXPECT_EQ(decay_products(tr, ProductWeight::t_log2_t, {1e-2, LimitMode::liminf}).verdict, Verdict::inconclusive);
}

TEST(DecayProducts, LiminfTLog2TOnExponentialDecay) {
  const auto tr = half_quadratic_flow(60.0);
  const auto r = decay_products(tr, ProductWeight::t_log2_t, {1e-2, LimitMode::liminf});
  EXPECT_EQ(r.verdict, Verdict::pass);
  const double t = 60.0;
  EXPECT_NEAR(r.values.at("tail_inf"), t * std::log(t) * std::log(t) * std::exp(-t), 1e-25);
}

TEST(DecayProducts, ShortHorizonIsInconclusive) {
  const auto tr = half_quadratic_flow(5.0);
  EXPECT_EQ(decay_products(tr, ProductWeight::t).verdict, Verdict::inconclusive);
}

TEST(BestIterate, QuarticFlowWindowMinimum) {
  const auto tr = quartic_flow(100.0);
  const double t = 10.0;
  const auto r = best_iterate_bound(tr, t);
  EXPECT_EQ(r.verdict, Verdict::pass);
  // s/(1+s)^2 decreases for s > 1: the window minimum is at s = t log t
  const double hi = t * std::log(t);
  EXPECT_NEAR(r.values.at("window_end"), hi, 1e-12);
  // the window end falls between samples, where the excess is interpolated linearly
  EXPECT_NEAR(r.series[0].lhs, hi / ((1 + hi) * (1 + hi)), 2e-4 * r.series[0].lhs);
  EXPECT_GE(r.series[0].lhs, hi / ((1 + hi) * (1 + hi)));
  EXPECT_NEAR(r.series[0].rhs, 8.0 / (2 * std::log(std::log(t))), 1e-12);
}

TEST(BestIterate, RejectsSmallTAndShortRuns) {
  const auto tr = quartic_flow(20.0);
  EXPECT_THROW(best_iterate_bound(tr, std::numbers::e), PreconditionError);
  EXPECT_THROW(best_iterate_bound(tr, 10.0), PreconditionError);
}

TEST(LengthBound, MonotoneFlowLengthIsInitialDistance) {
  const auto tr = half_quadratic_flow(20.0, 0.02);
  const auto r = length_bound(tr);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_NEAR(r.values.at("length"), 2.0, 1e-4);
}

TEST(LengthBound, PolylineOfDiscreteRun) {
  const QuadraticObjective obj({1.0});
  const auto tr = run_gd(obj, {1.0}, 0.5, 20);
  EXPECT_NEAR(polyline_length(tr), 1.0 - std::ldexp(1.0, -20), 1e-15);
  EXPECT_EQ(length_bound(tr).verdict, Verdict::pass);
}

TEST(SelfContracting, MonotonePathPasses) {
  const auto tr = half_quadratic_flow(10.0);
  const auto r = self_contracting_check(tr);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_EQ(r.values.at("violating_t3_count"), 0.0);
}

TEST(SelfContracting, OscillatingHeavyBallFailsWithWitness) {
  const QuadraticObjective obj({1.0});
  HeavyBallOdeOptions o;
  o.schedule = SampleSchedule::uniform(0.1);
  const auto tr = integrate_heavy_ball_ode(obj, {1.0}, Friction::nesterov(3.0), 20.0, o);
  const auto r = self_contracting_check(tr);
  ASSERT_EQ(r.verdict, Verdict::fail);
  const double t1 = r.values.at("witness_t1"), t2 = r.values.at("witness_t2"), t3 = r.values.at("witness_t3");
  EXPECT_LT(t1, t2);
  EXPECT_LT(t2, t3);
  // recheck the witness against the raw samples
  auto at = [&](double t) {
    for (std::size_t i = 0; i < tr.size(); ++i)
      if (tr.t(i) == t) return tr.x(i)[0];
    ADD_FAILURE() << "witness time not sampled";
    return 0.0;
  };
  EXPECT_GT(std::abs(at(t2) - at(t3)), std::abs(at(t1) - at(t3)));
}

TEST(SelfContracting, TwoSamplesAreVacuous) {
  const auto tr = hand_made({0, 1}, {0, 5}, {0, 0});
  EXPECT_EQ(self_contracting_check(tr).verdict, Verdict::pass);
}

TEST(GdSumBound, GeometricSeries) {
  const QuadraticObjective obj({1.0});
  const auto tr = run_gd(obj, {1.0}, 0.5, 60);
  const auto r = gd_sum_bound(tr, 0.5, 1.0);
  EXPECT_EQ(r.overall(), Verdict::pass);
  // x_n = 2^{-n}, f = 4^{-n}/2: eta sum = (1/4)(4/3)
  EXPECT_NEAR(r.values.at("eta_sum"), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.values.at("bound"), 2.0 / 3.0, 1e-15);
}

TEST(GdSumBound, StartAtMinimizer) {
  const QuadraticObjective obj({1.0});
  const auto tr = run_gd(obj, {0.0}, 0.5, 10);
  const auto r = gd_sum_bound(tr, 0.5, 1.0);
  EXPECT_EQ(r.values.at("eta_sum"), 0.0);
  EXPECT_EQ(r.values.at("bound"), 0.0);
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(GdSumBound, RejectsMismatchAndLargeSteps) {
  const QuadraticObjective obj({1.0});
  const auto tr = run_gd(obj, {1.0}, 0.5, 10);
  EXPECT_THROW(gd_sum_bound(tr, 0.25, 1.0), PreconditionError);
  const auto gf = half_quadratic_flow(1.0);
  EXPECT_THROW(gd_sum_bound(gf, 0.5, 1.0), PreconditionError);
}

TEST(SgdBounds, NoiselessReducesToGd) {
  const QuadraticObjective obj({1.0});
  SgdOptions so;
  so.replicas = 4;
  so.seed = 7;
  so.L = 1.0;
  const auto reps = run_sgd(obj, {1.0}, 0.5, 0.0, 60, so);
  const auto r = sgd_bounds(reps, 0.5, 1.0, 0.0);
  const auto gd = gd_sum_bound(run_gd(obj, {1.0}, 0.5, 60), 0.5, 1.0);
  const auto* c = r.child("gd_sum_bound");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->overall(), gd.overall());
  EXPECT_EQ(c->values.at("eta_sum"), gd.values.at("eta_sum"));
  EXPECT_EQ(r.values.at("standard_error"), 0.0);
}

TEST(SgdBounds, NoisyRunRespectsExpectedSum) {
  const QuadraticObjective obj({1.0});
  SgdOptions so;
  so.replicas = 500;
  so.seed = 11;
  so.L = 1.0;
  const auto reps = run_sgd(obj, {1.0}, 0.5, 1.0, 200, so);
  const auto r = sgd_bounds(reps, 0.5, 1.0, 1.0);
  EXPECT_EQ(r.verdict, Verdict::pass);
  // 1*2/2*1 + 2*2*(1/2)
  EXPECT_DOUBLE_EQ(r.values.at("bound"), 3.0);
  EXPECT_EQ(r.values.at("replicas"), 500.0);
  ASSERT_NE(r.child("as_proxy_tail_fraction"), nullptr);
}

TEST(SgdBounds, RejectsMixedReplicas) {
  const QuadraticObjective obj({1.0});
  SgdOptions so;
  so.L = 1.0;
  auto a = run_sgd(obj, {1.0}, 0.5, 1.0, 20, so);
  const auto b = run_sgd(obj, {1.0}, 0.25, 1.0, 20, so);
  a.push_back(b.front());
  EXPECT_THROW(sgd_bounds(a, 0.5, 1.0, 1.0), PreconditionError);
}

class HbLyapunovAlpha : public ::testing::TestWithParam<double> {};

TEST_P(HbLyapunovAlpha, NonIncreasingWithConsequences) {
  const double alpha = GetParam();
  const QuadraticObjective obj({1.0, 0.1});
  HeavyBallOdeOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-14;
  o.schedule = SampleSchedule::geometric(1e-2, 1.02, 0.2);
  const auto tr = integrate_heavy_ball_ode(obj, {1.0, -2.0}, Friction::nesterov(alpha), 60.0, o);
  const auto r = hb_lyapunov(tr);
  EXPECT_EQ(r.overall(), Verdict::pass) << r.note;
  EXPECT_EQ(r.values.at("alpha"), alpha);
  ASSERT_NE(r.child("excess_le_L0_over_t2"), nullptr);
  ASSERT_NE(r.child("energy_bound"), nullptr);
}

INSTANTIATE_TEST_SUITE_P(Alphas, HbLyapunovAlpha, ::testing::Values(3.0, 5.0));

TEST(HbLyapunov, StartAtMinimizerIsIdenticallyZero) {
  const QuadraticObjective obj({1.0});
  const auto tr = integrate_heavy_ball_ode(obj, {0.0}, Friction::nesterov(3.0), 10.0);
  const auto r = hb_lyapunov(tr);
  EXPECT_EQ(r.values.at("L0"), 0.0);
  for (const auto& p : r.series) EXPECT_EQ(p.lhs, 0.0);
  EXPECT_EQ(r.overall(), Verdict::pass);
}

TEST(HbLyapunov, Preconditions) {
  const QuadraticObjective obj({1.0});
  const auto tr = integrate_heavy_ball_ode(obj, {1.0}, Friction::nesterov(3.0), 5.0);
  EXPECT_THROW(hb_lyapunov(tr, 2.0), PreconditionError);
  EXPECT_THROW(hb_lyapunov(half_quadratic_flow(1.0), 3.0), PreconditionError);
}

TEST(HbSpeed, SpeedAndValueLowerBoundWithoutMinimizer) {
  const ExpDecay obj;
  HeavyBallOdeOptions o;
  o.t_start = 1e-3;
  o.schedule = SampleSchedule::uniform(0.5);
  const auto tr = integrate_heavy_ball_ode(obj, {0.0}, Friction::nesterov(3.0), 100.0, o);
  SpeedBoundOptions so;
  so.f1d = [](double x) { return std::exp(-x); };
  const auto r = hb_speed_bound(tr, so);
  EXPECT_EQ(r.overall(), Verdict::pass);
  EXPECT_NEAR(r.values.at("speed_bound"), std::sqrt(2.0), 1e-15);
  const auto* c = r.child("value_lower_bound");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->series.empty());
}

TEST(HbSpeed, RejectsMovingStart) {
  TrajectoryMeta m;
  m.kind = "heavy_ball_ode";
  Trajectory tr(1, true, m);
  tr.push(0.0, std::vector<double>{0.0}, std::vector<double>{1.0}, 1.0, 1.0);
  EXPECT_THROW(hb_speed_bound(tr), PreconditionError);
}
