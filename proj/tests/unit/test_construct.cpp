#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "decaylab/construct.hpp"
#include "decaylab/curves.hpp"
#include "decaylab/error.hpp"
#include "decaylab/flows.hpp"
#include "decaylab/objective.hpp"
#include "decaylab/quadrature.hpp"

using namespace decaylab;

namespace {

struct ClosedForm {
  DecayCurve curve;
  double X;
  double (*psi)(double);
  double (*phi)(double);
};

std::vector<ClosedForm> closed_forms() {
  return {
      {make_named_curve(CurveFamily::exponential), 2.0, [](double t) { return 2 * std::exp(-t / 2); },
       [](double x) { return x * x / 4; }},
      {make_named_curve(CurveFamily::inverse_square), 2 * std::numbers::sqrt2,
       [](double t) { return 2 * std::numbers::sqrt2 / std::sqrt(1 + t); }, [](double x) { return std::pow(x, 4) / 64; }},
  };
}

GradientFlowOptions tight() {
  GradientFlowOptions fo;
  fo.rtol = 1e-10;
  fo.atol = 1e-14;
  fo.schedule = SampleSchedule::uniform(0.25);
  return fo;
}

}  // namespace

TEST(BuildObjective, KnotsFollowTheClosedFormReparametrization) {
  for (const auto& c : closed_forms()) {
    const auto grid = linspace(0.0, 40.0, 401);
    const auto built = build_objective(c.curve, grid);
    EXPECT_NEAR(built.objective.X(), c.X, 1e-13) << c.curve.name();
    for (std::size_t j = 0; j < grid.size(); j += 40) {
      EXPECT_NEAR(built.psi[j], c.psi(grid[j]), 1e-13) << c.curve.name();
      // knot values are g(t_j) = phi(Psi(t_j))
      EXPECT_NEAR(c.phi(built.psi[j]), c.curve(grid[j]), 1e-13);
    }
  }
}

TEST(BuildObjective, SplineStaysCloseToTheClosedFormObjective) {
  for (const auto& c : closed_forms()) {
    const auto built = build_objective(c.curve, linspace(0.0, 40.0, 4001));
    for (double x : linspace(built.psi.back(), c.X, 301)) {
      const double ref = c.phi(x);
      EXPECT_NEAR(built.objective.value(x), ref, 1e-6 * ref + 1e-15) << c.curve.name() << " x=" << x;
    }
  }
}

TEST(BuildObjective, GradientFlowReproducesTheCurve) {
  for (const auto& c : closed_forms()) {
    const auto built = build_objective(c.curve, linspace(0.0, 40.0, 4001));
    const Objective1D obj(built.objective);
    const auto tr = integrate_gradient_flow(obj, {built.objective.X()}, 20.0, tight());
    for (std::size_t i = 0; i < tr.size(); ++i)
      EXPECT_NEAR(tr.f(i) / c.curve(tr.t(i)), 1.0, 1e-5) << c.curve.name() << " t=" << tr.t(i);
  }
}

TEST(BuildObjective, MinimumAtOrigin) {
  const auto built = build_objective(make_named_curve(CurveFamily::exponential), linspace(0.0, 30.0, 301));
  EXPECT_EQ(built.objective.value(0.0), 0.0);
  EXPECT_EQ(built.objective.slope(0.0), 0.0);
  EXPECT_TRUE(built.objective.has_minimizer());
}

TEST(BuildObjective, ObjectiveIsConvexAndIncreasingOnTheRightHalfLine) {
  const auto built =
      build_objective(make_named_curve(CurveFamily::inverse_power, {{"power", 3.0}}), linspace(0.0, 50.0, 501));
  const auto xs = linspace(-1.0, built.objective.X() + 1.0, 2001);
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double s0 = built.objective.slope(xs[i - 1]), s1 = built.objective.slope(xs[i]);
    EXPECT_GE(s1, s0 - 1e-12) << "slope decreases at x=" << xs[i];
    const double secant = (built.objective.value(xs[i + 1]) - built.objective.value(xs[i])) / (xs[i + 1] - xs[i]);
    EXPECT_GE(secant, s0 - 1e-9);
  }
}

TEST(BuildObjective, RejectsCurvesWithoutIntegrableSqrtDerivative) {
  EXPECT_THROW(build_objective(make_named_curve(CurveFamily::power_log, {{"alpha", 1.5}}), linspace(2.0, 10.0, 11)),
               PreconditionError);
  EXPECT_THROW(build_objective(make_named_curve(CurveFamily::inverse_power, {{"power", 1.0}}), linspace(0.0, 1.0, 3)),
               PreconditionError);
}

TEST(BuildObjective, JsonRoundTrip) {
  const auto built = build_objective(make_named_curve(CurveFamily::exponential), linspace(0.0, 20.0, 201));
  const auto back = ConvexObjective1D::from_json(built.objective.to_json());
  for (double x : linspace(-0.5, 2.5, 61)) EXPECT_EQ(back.value(x), built.objective.value(x));
}

TEST(Envelope, SandwichForExponential) {
  const auto env = build_no_minimizer_envelope(make_named_curve(CurveFamily::exponential));
  const double v = env(1.0);
  EXPECT_GE(v, std::exp(-2.0) / 2);
  EXPECT_LE(v, std::exp(-1.0));
}

TEST(Envelope, ZeroCurveGivesZero) {
  const auto env = build_no_minimizer_envelope(make_named_curve(CurveFamily::constant, {{"value", 0.0}}));
  for (double t : {0.5, 1.0, 10.0}) EXPECT_EQ(env(t), 0.0);
}

TEST(Envelope, MatchesTheDefiningIntegralAndItsBounds) {
  const auto g = make_named_curve(CurveFamily::inverse_power, {{"power", 1.0}, {"shift", 1.0}});
  const auto env = build_no_minimizer_envelope(g);
  for (double t : {1.0, 10.0, 100.0}) {
    // defining integral int_t^inf (s - t)(-g'(s))/s ds by quadrature
    const double ref =
        integrate_to_infinity([&](double s) { return (s - t) * (-g.deriv(s)) / s; }, t, 1e-10).value;
    EXPECT_NEAR(env(t), ref, 1e-8 * ref);
    EXPECT_GE(env(t), 1 / (2 * (1 + 2 * t)));
    EXPECT_LE(env(t), 1 / (1 + t));
    // phi' = (phi - g)/t against a central difference
    const double h = 1e-4 * t;
    EXPECT_NEAR(env.deriv(t), (env(t + h) - env(t - h)) / (2 * h), 1e-6 * std::abs(env.deriv(t)));
  }
}

TEST(Envelope, IsConvexAndDecreasing) {
  const auto env = build_no_minimizer_envelope(make_named_curve(CurveFamily::inverse_power, {{"power", 0.5}}));
  const auto ts = logspace(0.1, 100.0, 60);
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    EXPECT_LT(env(ts[i]), env(ts[i - 1]));
    const double chord = env(ts[i - 1]) + (env(ts[i + 1]) - env(ts[i - 1])) * (ts[i] - ts[i - 1]) / (ts[i + 1] - ts[i - 1]);
    EXPECT_LE(env(ts[i]), chord + 1e-12);
  }
}

TEST(Preprocess, MonotoneInputIsOnlyAveraged) {
  const auto out = preprocess_monotone_smooth([](double t) { return std::exp(-t / 4); });
  for (double t : {1.5, 3.0, 10.0, 40.0}) {
    const double ref = 4 * (std::exp(-(t - 1) / 4) - std::exp(-t / 4));  // int_{t-1}^t raw
    EXPECT_NEAR(out(t), ref, 1e-5 * ref) << "t=" << t;
  }
}

TEST(Preprocess, OscillatingInputBecomesMonotone) {
  auto raw = [](double t) { return std::exp(-t) * (1 + std::sin(10 * t)) / 2; };
  const auto out = preprocess_monotone_smooth(raw);
  double prev = out(out.t_min());
  for (double t : linspace(out.t_min(), 60.0, 5000)) {
    EXPECT_LE(out(t), prev + 1e-15);
    EXPECT_LE(out.deriv(t), 0.0);
    prev = out(t);
  }
  // above the running average of raw, which is never exceeded by its running max
  for (double t : {2.0, 5.0}) EXPECT_GE(out(t), integrate(raw, t - 1, t).value - 1e-4);
}

TEST(Preprocess, ZeroStaysZero) {
  const auto out = preprocess_monotone_smooth([](double) { return 0.0; });
  for (double t : {1.0, 10.0, 500.0}) EXPECT_EQ(out(t), 0.0);
}

TEST(Preprocess, RejectsRawThatDoesNotDecay) {
  EXPECT_THROW(preprocess_monotone_smooth([](double t) { return 1.0 + std::sin(t); }), PreconditionError);
}

TEST(NoMinimizer, GradientFlowStaysAboveHalfTheCurveAtDoubleTime) {
  const auto g = make_named_curve(CurveFamily::inverse_power, {{"power", 1.0}, {"shift", 1.0}});
  const auto env = build_no_minimizer_envelope(g);
  const auto phi = build_no_minimizer_objective(env, linspace(0.01, 300.0, 3000), NoMinimizerVariant::gradient_flow);
  const Objective1D obj(phi);
  GradientFlowOptions fo = tight();
  const auto tr = integrate_gradient_flow(obj, {phi.knots().front().x}, 100.0, fo);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.t(i);
    if (t < 1.0) continue;
    EXPECT_GE(tr.f(i), g(2 * t) / 2) << "t=" << t;
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(NoMinimizer, KnotValuesArePositiveAndDecreasing) {
  const auto env = build_no_minimizer_envelope(make_named_curve(CurveFamily::exponential));
  for (auto variant : {NoMinimizerVariant::gradient_flow, NoMinimizerVariant::heavy_ball}) {
    const auto phi = build_no_minimizer_objective(env, linspace(0.05, 10.0, 200), variant);
    EXPECT_FALSE(phi.has_minimizer());
    const auto& k = phi.knots();
    for (std::size_t i = 0; i < k.size(); ++i) {
      EXPECT_GT(k[i].value, 0.0);
      if (i) EXPECT_LT(k[i].value, k[i - 1].value);
    }
    // the right extension never reaches zero
    EXPECT_GT(phi.value(k.back().x + 1.0), 0.0);
    EXPECT_LT(phi.value(k.back().x + 1.0), k.back().value);
    EXPECT_FALSE(Objective1D(phi).minimizer().has_value());
  }
}

TEST(NoMinimizer, ConstantCurveIsRejected) {
  const auto c = make_named_curve(CurveFamily::constant, {{"value", 1.0}});
  EXPECT_THROW(build_no_minimizer_objective(c, linspace(0.0, 10.0, 11)), PreconditionError);
}
