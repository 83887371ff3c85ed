#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "decaylab/curves.hpp"
#include "decaylab/error.hpp"
#include "decaylab/flows.hpp"
#include "decaylab/objective.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/spectral.hpp"

using namespace decaylab;

namespace {

constexpr double kE2 = std::numbers::e * std::numbers::e;

DecayCurve slow() { return make_named_curve(CurveFamily::inverse_power, {{"power", 1.5}, {"shift", 0.0}, {"t_min", 1.0}}); }

}  // namespace

TEST(Spectral, InitialProfileClosedForm) {
  const auto p = build_profile(slow(), 1e4);
  for (std::size_t j = 0; j < p.s.size(); ++j)
    EXPECT_NEAR(p.u0[j], std::sqrt(3 * kE2) * std::pow(p.s[j], -0.75), 1e-13 * p.u0[j]);
  EXPECT_EQ(p.s.front(), 1.0);
  EXPECT_EQ(p.s.back(), 1e4);
  EXPECT_EQ(p.bias, std::pow(1e4, -1.5));
}

TEST(Spectral, ZeroCurveGivesZeroEnergy) {
  const auto p = build_profile(make_named_curve(CurveFamily::constant, {{"value", 0.0}}), 100.0);
  for (double u : p.u0) EXPECT_EQ(u, 0.0);
  for (double t : {0.0, 1.0, 10.0}) EXPECT_EQ(gf_energy(p, t), 0.0);
  for (const auto& q : hb_energy(p, 3.0, {0.0, 1.0, 5.0}, 0.01)) EXPECT_EQ(q.value, 0.0);
}

TEST(Spectral, NormIdentity) {
  // (1/2e^2) int_1^R u0^2 = g(1) - R g(R) + int_1^R g, with the right side in closed form
  const auto g = slow();
  const double R = 1e4;
  const auto p = build_profile(g, R, 64);
  const double lhs = p.norm_sq() / (2 * kE2);
  const double rhs = 1.0 - R * g(R) + 2.0 * (1.0 - 1.0 / std::sqrt(R));
  EXPECT_NEAR(lhs, rhs, 1e-4 * rhs);
}

TEST(Spectral, EnergyAtTimeZero) {
  // F(u0) = 1/2 int_1^S u0^2/s = e^2 (g(1) - g(S)) on the truncated domain
  for (double S : {1e2, 1e4}) {
    const auto p = build_profile(slow(), S, 64);
    // trapezoid in log s on s^{-3/2}: relative error about (1.5 dl)^2 / 12 = 2.4e-4
    EXPECT_NEAR(gf_energy(p, 0.0), kE2 * (1.0 - std::pow(S, -1.5)), 5e-4 * kE2);
  }
}

TEST(Spectral, EnergyStaysAboveTheCurveMinusBias) {
  const auto g = slow();
  const auto p = build_profile(g, 1e4);
  for (double t : {1.0, 10.0, 100.0}) {
    EXPECT_GE(gf_energy(p, t), g(t) - p.bias) << "t=" << t;
    EXPECT_GE(gf_energy(p, t), gf_tail_term(p, t));
    // the tail term is the trapezoid sum of int_{s_j >= t}^S -g'
    EXPECT_NEAR(gf_tail_term(p, t), g(t) - p.bias, 0.05 * g(t));
  }
}

TEST(Spectral, EnergyIsDecreasingAndConvexInTime) {
  const auto p = build_profile(slow(), 1e3, 32);
  const auto ts = linspace(0.0, 50.0, 101);
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double a = gf_energy(p, ts[i - 1]), b = gf_energy(p, ts[i]), c = gf_energy(p, ts[i + 1]);
    EXPECT_LT(b, a);
    EXPECT_LE(b, 0.5 * (a + c) * (1 + 1e-14));
  }
}

TEST(Spectral, RejectsNonIntegrableCurves) {
  EXPECT_THROW(build_profile(make_named_curve(CurveFamily::inverse_power, {{"power", 1.0}}), 100.0),
               PreconditionError);
  EXPECT_THROW(build_profile(slow(), 1.0), PreconditionError);
}

TEST(Flatness, ExactEnergyAndBound) {
  const auto phi = RateFunction::named("identity");
  for (std::size_t n : {1u, 2u, 10u, 1000u}) {
    const auto q = flatness_sequence(phi, n);
    const double N = double(n);
    EXPECT_DOUBLE_EQ(q.R, N);
    EXPECT_DOUBLE_EQ(q.norm, 1.0 / N);
    // 1/2 int_R^{1+R} (1/n)^2 / s ds
    const double ref = integrate([&](double s) { return 0.5 / (N * N * s); }, q.R, q.R + 1).value;
    EXPECT_NEAR(q.energy, ref, 1e-14 * ref);
    EXPECT_LE(q.energy, 1.0 / (N * N));
    EXPECT_LE(q.energy, q.bound);
  }
  EXPECT_EQ(flatness_sequence(phi, 1).norm, 1.0);
}

TEST(SpectralHeavyBall, TimeZeroMatchesGradientFlowBitwise) {
  const auto p = build_profile(slow(), 1e3, 32);
  const auto hb = hb_energy(p, 3.0, {0.0}, 0.01);
  const double gf = gf_energy(p, 0.0);
  EXPECT_EQ(std::memcmp(&hb.front().value, &gf, sizeof gf), 0);
}

TEST(SpectralHeavyBall, SerialEqualsParallel) {
  const auto p = build_profile(slow(), 1e3, 32);
  const std::vector<double> ts{0.5, 2.0, 10.0, 40.0};
  const auto a = hb_energy(p, 3.0, ts, 0.01, Exec::serial);
  set_thread_count(4);
  const auto b = hb_energy(p, 3.0, ts, 0.01, Exec::parallel);
  set_thread_count(1);
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(std::memcmp(&a[i].value, &b[i].value, sizeof(double)), 0);
}

TEST(SpectralHeavyBall, LowerBoundHolds) {
  const auto p = build_profile(slow(), 1e3, 32);
  for (const auto& q : hb_energy(p, 3.0, {1.0, 3.0, 10.0, 30.0}, 0.001)) {
    EXPECT_GE(q.value, q.lower_bound) << "t=" << q.t;
    EXPECT_EQ(q.lower_bound, hb_lower_bound(p, 3.0, q.t));
  }
}

TEST(SpectralHeavyBall, SingleModeKeepsItsAmplitudeBeforeTheTransition) {
  // mode s = 4 (curvature 1/4), alpha = 3: overdamped while t < alpha sqrt(s) / 2 = 3
  HeavyBallOdeOptions ho;
  ho.rtol = 1e-10;
  ho.t_start = 1e-6;
  ho.schedule = SampleSchedule::uniform(0.01);
  const auto tr = integrate_heavy_ball_ode(QuadraticObjective({0.25}), {1.0}, Friction::nesterov(3.0), 2.99, ho);
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_GE(std::abs(tr.x(i)[0]), std::exp(-0.75) - 1e-9);
}

TEST(SpectralHeavyBall, ChangeOfVariablesIdentity) {
  // int_0^inf g(sqrt t) dt = 2 int_0^inf g(s) s ds for g = (1+t)^{-3}, both sides = 1
  auto g = [](double t) { return std::pow(1 + t, -3.0); };
  const double lhs = integrate_to_infinity([&](double t) { return g(std::sqrt(t)); }, 0.0, 1e-10).value;
  const double rhs = 2 * integrate_to_infinity([&](double s) { return g(s) * s; }, 0.0, 1e-10).value;
  EXPECT_NEAR(lhs, rhs, 1e-7);
  EXPECT_NEAR(rhs, 1.0, 1e-7);
}
