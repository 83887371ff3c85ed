#include "decaylab/spectral.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "decaylab/csv.hpp"
#include "decaylab/error.hpp"
#include "decaylab/quadrature.hpp"

namespace decaylab {

namespace {
constexpr double kE2 = std::numbers::e * std::numbers::e;
}

double SpectralProfile::norm_sq() const {
  double s = 0.0;
  for (std::size_t j = 0; j < u0.size(); ++j) s += w[j] * u0[j] * u0[j];
  return s;
}

SpectralProfile build_profile(const DecayCurve& curve, double S_max, std::size_t per_decade) {
  if (!(S_max > 1.0)) throw PreconditionError("spectral profile: need S_max > 1");
  if (per_decade < 2) throw PreconditionError("spectral profile: need at least 2 nodes per decade");
  if (curve.t_min() > 1.0) throw PreconditionError("spectral profile: curve must be defined on [1, inf)");
  if (!holds(curve.flags().monotone_decreasing))
    throw PreconditionError("spectral profile: curve must be monotone decreasing");
  double tail = 0.0;
  if (curve.has_tail_integral()) {
    tail = *curve.tail_integral(S_max);
  } else {
    try {
      tail = integrate_to_infinity([&](double s) { return curve(s); }, S_max).value;
    } catch (const NumericalError&) {
      throw PreconditionError("spectral profile: curve does not look integrable on [1, inf)");
    }
  }
  if (!std::isfinite(tail)) throw PreconditionError("spectral profile: curve is not integrable");

  const double decades = std::log10(S_max);
  const auto M = std::size_t(std::ceil(decades * double(per_decade))) + 1;
  const double dl = std::log(S_max) / double(M - 1);
  SpectralProfile p{{}, {}, {}, S_max, curve(S_max), 0.0, curve};
  p.s.resize(M);
  p.u0.resize(M);
  p.w.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double s = j + 1 == M ? S_max : std::exp(dl * double(j));
    p.s[j] = s;
    p.w[j] = s * dl * ((j == 0 || j + 1 == M) ? 0.5 : 1.0);
    p.u0[j] = std::sqrt(std::max(-2.0 * kE2 * s * curve.deriv(s), 0.0));
  }
  p.norm_bias = S_max * p.bias + tail;
  return p;
}

double gf_energy(const SpectralProfile& p, double t) {
  if (t < 0.0) throw PreconditionError("gf_energy: need t >= 0");
  double F = 0.0;
  for (std::size_t j = 0; j < p.s.size(); ++j) {
    const double e = std::exp(-2.0 * t / p.s[j]);
    F += 0.5 * p.w[j] * (p.u0[j] * p.u0[j] * e) / p.s[j];
  }
  return F;
}

double gf_tail_term(const SpectralProfile& p, double t) {
  double F = 0.0;
  for (std::size_t j = 0; j < p.s.size(); ++j)
    if (p.s[j] >= t) F += p.w[j] * p.u0[j] * p.u0[j] / p.s[j];
  return F / (2.0 * kE2);
}

FlatnessPoint flatness_sequence(const RateFunction& phi, std::size_t n) {
  if (n == 0) throw PreconditionError("flatness sequence: n >= 1");
  const double r = 1.0 / double(n);
  const double ph = phi(r);
  if (!(ph > 0.0)) throw PreconditionError("flatness sequence: phi(1/n) must be positive");
  FlatnessPoint fp;
  fp.R = 1.0 / ph;
  fp.norm = r;
  fp.energy = std::log1p(1.0 / fp.R) / (2.0 * double(n) * double(n));
  fp.bound = 1.0 / (double(n) * fp.R);
  fp.ratio = fp.energy / ph;
  return fp;
}

double hb_lower_bound(const SpectralProfile& p, double alpha, double t) {
  const double s_lo = 4.0 * t * t / (alpha * alpha);
  double F = 0.0;
  for (std::size_t j = 0; j < p.s.size(); ++j)
    if (p.s[j] > s_lo) F += p.w[j] * p.u0[j] * p.u0[j] / p.s[j];
  return 0.5 * std::exp(-alpha / 2.0) * F;
}

std::vector<HbEnergyPoint> hb_energy(const SpectralProfile& p, double alpha, const std::vector<double>& times,
                                     double h, Exec exec) {
  if (!(alpha >= 3.0)) throw PreconditionError("hb_energy: need alpha >= 3");
  if (!(h > 0.0) || !(h <= 1.0)) throw PreconditionError("hb_energy: need 0 < h <= 1 (mode curvatures are <= 1)");
  const double sh = std::sqrt(h);
  std::vector<long long> step(times.size());
  long long n_max = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0) throw PreconditionError("hb_energy: negative time");
    step[k] = std::llround(times[k] / sh);
    n_max = std::max(n_max, step[k]);
  }
  std::vector<std::size_t> order(times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return step[a] < step[b]; });

  const std::size_t M = p.s.size(), K = times.size();
  std::vector<double> contrib(K * M, 0.0);
  std::vector<char> bad(M, 0);
  parallel_for(M, exec, [&](std::size_t j) {
    const double mu = 1.0 / p.s[j];
    double x = p.u0[j], y = x;
    std::size_t next = 0;
    for (long long n = 0; n <= n_max && next < K; ++n) {
      while (next < K && step[order[next]] == n) {
        contrib[order[next] * M + j] = 0.5 * p.w[j] * (x * x) / p.s[j];
        ++next;
      }
      const double xn = y - h * mu * y;
      y = xn + double(n) / (double(n) + alpha) * (xn - x);
      x = xn;
      if (!std::isfinite(x)) {
        bad[j] = 1;
        return;
      }
    }
  });
  for (std::size_t j = 0; j < M; ++j)
    if (bad[j]) throw NumericalError(fmt::format("hb_energy: mode s = {} diverged", p.s[j]));
  std::vector<HbEnergyPoint> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    double F = 0.0;
    for (std::size_t j = 0; j < M; ++j) F += contrib[k * M + j];
    out[k] = {times[k], F, hb_lower_bound(p, alpha, times[k])};
  }
  return out;
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyRow>& rows) {
  CsvWriter w(path, {"t", "F_numeric", "F_lower_bound", "g_target", "bias"});
  for (const auto& r : rows) w.row({r.t, r.F_numeric, r.F_lower_bound, r.g_target, r.bias});
}

}  // namespace decaylab
