#include "decaylab/ode.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "decaylab/error.hpp"

namespace decaylab {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// PI controller constants (Hairer-Norsett-Wanner, DOPRI5)
constexpr double kSafe = 0.9, kBeta = 0.04, kFacMin = 0.2, kFacMax = 10.0;

double scaled_norm(const std::vector<double>& v, const std::vector<double>& y, const OdeOptions& opt) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sc = opt.atol + opt.rtol * std::abs(y[i]);
    s += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(s / double(v.size()));
}

}  // namespace

OdeStats integrate_dopri5(const OdeRhs& rhs, double t0, std::vector<double> y, const std::vector<double>& samples,
                          const OdeObserver& observe, const OdeOptions& opt) {
  const std::size_t n = y.size();
  OdeStats st;
  observe(t0, y);
  if (samples.empty()) return st;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!(samples[i] > (i ? samples[i - 1] : t0))) throw PreconditionError("dopri5: sample times must increase past t0");

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n), err(n);
  auto eval = [&](double t, const std::vector<double>& u, std::vector<double>& du) {
    rhs(t, u, du);
    ++st.rhs_evals;
  };
  double t = t0;
  eval(t, y, k1);

  double h = opt.h_init;
  if (!(h > 0.0)) {
    const double d0 = scaled_norm(y, y, opt), d1 = scaled_norm(k1, y, opt);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, samples.back() - t0);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h0 * k1[i];
    eval(t + h0, yt, k2);
    for (std::size_t i = 0; i < n; ++i) err[i] = k2[i] - k1[i];
    const double d2 = scaled_norm(err, y, opt) / h0;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }
  if (opt.h_max > 0.0) h = std::min(h, opt.h_max);

  double facold = 1e-4;
  const double expo1 = 0.2 - kBeta * 0.75;
  std::size_t next = 0;
  while (next < samples.size()) {
    const double target = samples[next];
    if (st.accepted + st.rejected >= opt.max_steps)
      throw IntegrationError(fmt::format("dopri5: step budget exhausted at t = {}", t), t, y);
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw IntegrationError(fmt::format("dopri5: step size underflow at t = {}", t), t, y);

    double hs = h;
    bool clipped = false;
    if (t + hs >= target - 1e-14 * std::max(1.0, std::abs(target))) {
      hs = target - t;
      clipped = true;
    }
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * a21 * k1[i];
    eval(t + c2 * hs, yt, k2);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    eval(t + c3 * hs, yt, k3);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * hs, yt, k4);
    for (std::size_t i = 0; i < n; ++i)
      yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * hs, yt, k5);
    for (std::size_t i = 0; i < n; ++i)
      yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tnew = clipped ? target : t + hs;
    eval(tnew, yt, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(tnew, ynew, k7);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      e += (ei / sc) * (ei / sc);
    }
    e = std::sqrt(e / double(n));
    if (!std::isfinite(e)) {
      ++st.rejected;
      h = hs * kFacMin;
      continue;
    }
    const double fac11 = std::pow(e, expo1);
    if (e <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
      double hnew = hs / fac;
      facold = std::max(e, 1e-4);
      ++st.accepted;
      t = tnew;
      y.swap(ynew);
      k1.swap(k7);
      if (clipped) {
        hnew = std::max(hnew, h);
        observe(t, y);
        ++next;
      }
      h = opt.h_max > 0.0 ? std::min(hnew, opt.h_max) : hnew;
    } else {
      ++st.rejected;
      h = hs / std::min(1.0 / kFacMin, fac11 / kSafe);
    }
  }
  return st;
}

}  // namespace decaylab
