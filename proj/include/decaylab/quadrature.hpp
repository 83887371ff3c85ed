#pragma once

#include <functional>
#include <vector>

namespace decaylab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

using ScalarFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a, b], split at any interior breakpoints.
QuadResult integrate(const ScalarFn& f, double a, double b, const std::vector<double>& breaks = {},
                     double rtol = 1e-12);

// Integral over [a, inf). Throws NumericalError when the result is not finite
// or the error estimate indicates divergence.
QuadResult integrate_to_infinity(const ScalarFn& f, double a, double rtol = 1e-10);

}  // namespace decaylab
