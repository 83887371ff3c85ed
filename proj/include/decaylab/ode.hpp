#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace decaylab {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 0.0;  // 0: automatic
  double h_max = 0.0;   // 0: unbounded
  std::size_t max_steps = 100'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;
using OdeObserver = std::function<void(double t, std::span<const double> y)>;

// Dormand-Prince 5(4) with PI step-size control. Steps are clipped so that
// every requested sample time is hit exactly; `observe` is called at t0 and at
// every sample. Throws IntegrationError (with the last accepted state) when
// the step size underflows or the step budget runs out.
OdeStats integrate_dopri5(const OdeRhs& rhs, double t0, std::vector<double> y0, const std::vector<double>& samples,
                          const OdeObserver& observe, const OdeOptions& opt = {});

}  // namespace decaylab
