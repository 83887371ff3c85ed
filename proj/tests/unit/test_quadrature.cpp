#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "decaylab/error.hpp"
#include "decaylab/quadrature.hpp"

using namespace decaylab;

TEST(Quadrature, PolynomialAndExponential) {
  EXPECT_NEAR(integrate([](double x) { return 3 * x * x; }, 0, 2).value, 8.0, 1e-13);
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x); }, 0, 5).value, 1 - std::exp(-5.0), 1e-14);
}

TEST(Quadrature, BreakpointsHandleKinks) {
  auto f = [](double x) { return std::abs(x - 0.3); };
  const double exact = 0.5 * (0.3 * 0.3 + 0.7 * 0.7);
  EXPECT_NEAR(integrate(f, 0, 1, {0.3}).value, exact, 1e-14);
}

TEST(Quadrature, SemiInfinite) {
  EXPECT_NEAR(integrate_to_infinity([](double t) { return std::exp(-t / 2); }, 0).value, 2.0, 1e-10);
  EXPECT_NEAR(integrate_to_infinity([](double t) { return 1 / ((1 + t) * (1 + t)); }, 1).value, 0.5, 1e-9);
  // int_2^inf 1/(t (log t)^1.5) after t = e^u: int_{log 2}^inf u^{-3/2} du = 2 / sqrt(log 2)
  EXPECT_NEAR(integrate_to_infinity([](double u) { return std::pow(u, -1.5); }, std::numbers::ln2, 1e-10).value,
              2 / std::sqrt(std::numbers::ln2), 1e-8);
}

TEST(Quadrature, DivergentTailIsReported) {
  EXPECT_THROW(integrate_to_infinity([](double t) { return 1 / (1 + t); }, 0), NumericalError);
}
