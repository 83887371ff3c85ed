#include "decaylab/curves.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "decaylab/error.hpp"

namespace decaylab {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double required(const std::map<std::string, double>& p, const std::string& key, const std::string& family) {
  auto it = p.find(key);
  if (it == p.end()) throw PreconditionError(family + ": missing parameter '" + key + "'");
  return it->second;
}

nlohmann::json params_json(const std::map<std::string, double>& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

CurveFlags all_asserted(bool sqrt_integrable, bool convex = true) {
  CurveFlags f;
  f.monotone_decreasing = FlagState::asserted;
  f.convex = convex ? FlagState::asserted : FlagState::unknown;
  f.limit_zero = FlagState::asserted;
  f.sqrt_deriv_integrable = sqrt_integrable ? FlagState::asserted : FlagState::unknown;
  return f;
}

nlohmann::json flags_json(const CurveFlags& f) {
  return {{"monotone_decreasing", to_string(f.monotone_decreasing)},
          {"convex", to_string(f.convex)},
          {"limit_zero", to_string(f.limit_zero)},
          {"sqrt_deriv_integrable", to_string(f.sqrt_deriv_integrable)}};
}

std::string variant_name(StaircaseVariant v) { return v == StaircaseVariant::sqrt_steps ? "sqrt_steps" : "cbrt_steps"; }

double staircase_term(const StaircaseSpec& spec, std::size_t n) {
  const double phi = spec.phi(spec.radii[n]);
  return spec.variant == StaircaseVariant::sqrt_steps ? 1.0 / std::sqrt(phi) : 1.0 / std::cbrt(phi);
}

}  // namespace

std::string to_string(FlagState s) {
  switch (s) {
    case FlagState::asserted: return "asserted";
    case FlagState::verified: return "verified";
    default: return "unknown";
  }
}

DecayCurve::DecayCurve(std::string name, CurveFns fns, double t_min, CurveFlags flags,
                       nlohmann::json description) {
  if (!fns.eval || !fns.deriv) throw PreconditionError("DecayCurve needs eval and deriv");
  std::sort(fns.breakpoints.begin(), fns.breakpoints.end());
  impl_ = std::make_shared<const Impl>(
      Impl{std::move(name), std::move(fns), t_min, flags, std::move(description)});
}

std::optional<double> DecayCurve::tail_integral(double t) const {
  if (!impl_->fns.tail_integral) return std::nullopt;
  return impl_->fns.tail_integral(t);
}

std::optional<double> DecayCurve::sqrt_deriv_tail(double t) const {
  if (!impl_->fns.sqrt_deriv_tail) return std::nullopt;
  return impl_->fns.sqrt_deriv_tail(t);
}

DecayCurve DecayCurve::with_flags(CurveFlags flags) const {
  DecayCurve c = *this;
  auto impl = std::make_shared<Impl>(*impl_);
  impl->flags = flags;
  c.impl_ = impl;
  return c;
}

DecayCurve DecayCurve::renamed(std::string name) const {
  DecayCurve c = *this;
  auto impl = std::make_shared<Impl>(*impl_);
  impl->name = std::move(name);
  c.impl_ = impl;
  return c;
}

nlohmann::json DecayCurve::to_json() const {
  if (impl_->description.is_null())
    throw Error("curve '" + impl_->name + "' was built from callables and has no serial form");
  nlohmann::json j = impl_->description;
  j["t_min"] = impl_->t_min;
  j["flags"] = flags_json(impl_->flags);
  return j;
}

CurveFamily parse_family(const std::string& s) {
  if (s == "exponential") return CurveFamily::exponential;
  if (s == "inverse_power") return CurveFamily::inverse_power;
  if (s == "inverse_square") return CurveFamily::inverse_square;
  if (s == "power_log") return CurveFamily::power_log;
  if (s == "linear_cutoff") return CurveFamily::linear_cutoff;
  if (s == "constant") return CurveFamily::constant;
  throw PreconditionError("unknown curve family '" + s + "'");
}

std::string to_string(CurveFamily f) {
  switch (f) {
    case CurveFamily::exponential: return "exponential";
    case CurveFamily::inverse_power: return "inverse_power";
    case CurveFamily::inverse_square: return "inverse_square";
    case CurveFamily::power_log: return "power_log";
    case CurveFamily::linear_cutoff: return "linear_cutoff";
    case CurveFamily::constant: return "constant";
  }
  return "?";
}

DecayCurve make_named_curve(const std::string& family, const std::map<std::string, double>& params) {
  return make_named_curve(parse_family(family), params);
}

DecayCurve make_named_curve(CurveFamily family, const std::map<std::string, double>& params) {
  const std::string fname = to_string(family);
  nlohmann::json desc = {{"family", fname}, {"params", params_json(params)}};

  switch (family) {
    case CurveFamily::exponential: {
      const double A = param(params, "amplitude", 1.0);
      const double k = param(params, "rate", 1.0);
      if (!(A >= 0.0) || !(k > 0.0)) throw PreconditionError("exponential: need amplitude >= 0, rate > 0");
      CurveFns fns;
      fns.eval = [A, k](double t) { return A * std::exp(-k * t); };
      fns.deriv = [A, k](double t) { return -A * k * std::exp(-k * t); };
      fns.tail_integral = [A, k](double t) { return A / k * std::exp(-k * t); };
      fns.sqrt_deriv_tail = [A, k](double t) { return 2.0 * std::sqrt(A * k) / k * std::exp(-0.5 * k * t); };
      return DecayCurve(fname, std::move(fns), 0.0, all_asserted(true), desc);
    }
    case CurveFamily::inverse_square:
      return make_named_curve(CurveFamily::inverse_power, {{"power", 2.0}, {"shift", 1.0}})
          .renamed("inverse_square");
    case CurveFamily::inverse_power: {
      const double p = required(params, "power", fname);
      const double c = param(params, "shift", 1.0);
      const double t0 = param(params, "t_min", 0.0);
      if (!(p > 0.0)) throw PreconditionError("inverse_power: need power > 0");
      if (!(c + t0 > 0.0)) throw PreconditionError("inverse_power: need shift + t_min > 0");
      CurveFns fns;
      fns.eval = [p, c](double t) { return std::pow(c + t, -p); };
      fns.deriv = [p, c](double t) { return -p * std::pow(c + t, -p - 1.0); };
      if (p > 1.0) {
        fns.tail_integral = [p, c](double t) { return std::pow(c + t, 1.0 - p) / (p - 1.0); };
        fns.sqrt_deriv_tail = [p, c](double t) {
          return 2.0 * std::sqrt(p) * std::pow(c + t, -(p - 1.0) / 2.0) / (p - 1.0);
        };
      }
      return DecayCurve(fname, std::move(fns), t0, all_asserted(p > 1.0), desc);
    }
    case CurveFamily::power_log: {
      const double a = required(params, "alpha", fname);
      if (!(a > 0.0)) throw PreconditionError("power_log: need alpha > 0");
      CurveFns fns;
      fns.eval = [a](double t) { return 1.0 / (t * std::pow(std::log(t), a)); };
      fns.deriv = [a](double t) {
        const double L = std::log(t);
        return -(std::pow(L, -a) + a * std::pow(L, -a - 1.0)) / (t * t);
      };
      if (a > 1.0) fns.tail_integral = [a](double t) { return std::pow(std::log(t), 1.0 - a) / (a - 1.0); };
      return DecayCurve(fname, std::move(fns), 2.0, all_asserted(a > 2.0), desc);
    }
    case CurveFamily::linear_cutoff: {
      const double r = param(params, "rate", 1.0);
      if (!(r > 0.0)) throw PreconditionError("linear_cutoff: need rate > 0");
      const double end = 1.0 / r;
      CurveFns fns;
      fns.eval = [r](double t) { return std::max(1.0 - r * t, 0.0); };
      fns.deriv = [r, end](double t) { return t < end ? -r : 0.0; };
      fns.tail_integral = [r, end](double t) { return t < end ? (1.0 - r * t) * (1.0 - r * t) / (2.0 * r) : 0.0; };
      fns.sqrt_deriv_tail = [r, end](double t) { return t < end ? std::sqrt(r) * (end - t) : 0.0; };
      fns.breakpoints = {end};
      return DecayCurve(fname, std::move(fns), 0.0, all_asserted(true), desc);
    }
    case CurveFamily::constant: {
      const double v = param(params, "value", 0.0);
      if (!(v >= 0.0)) throw PreconditionError("constant: need value >= 0");
      CurveFns fns;
      fns.eval = [v](double) { return v; };
      fns.deriv = [](double) { return 0.0; };
      fns.sqrt_deriv_tail = [](double) { return 0.0; };
      if (v == 0.0) fns.tail_integral = [](double) { return 0.0; };
      CurveFlags f;
      f.monotone_decreasing = FlagState::asserted;
      f.convex = FlagState::asserted;
      f.limit_zero = v == 0.0 ? FlagState::asserted : FlagState::unknown;
      f.sqrt_deriv_integrable = FlagState::asserted;
      return DecayCurve(fname, std::move(fns), 0.0, f, desc);
    }
  }
  throw PreconditionError("unsupported curve family");
}

RateFunction RateFunction::named(const std::string& family, const std::map<std::string, double>& params) {
  RateFunction r{family, params, {}};
  if (family == "identity") {
    r.fn = [](double t) { return t; };
  } else if (family == "power") {
    const double p = required(params, "power", "rate function power");
    if (!(p > 0.0)) throw PreconditionError("rate function power: need power > 0");
    r.fn = [p](double t) { return std::pow(t, p); };
  } else if (family == "log1p") {
    r.fn = [](double t) { return std::log1p(t); };
  } else {
    throw PreconditionError("unknown rate function '" + family + "'");
  }
  return r;
}

std::vector<double> geometric_radii(double base, std::size_t count) {
  std::vector<double> r(count);
  double v = 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    v *= base;
    r[i] = v;
  }
  return r;
}

SeriesCheck check_staircase_series(const StaircaseSpec& spec, std::size_t N) {
  if (N > spec.radii.size()) throw PreconditionError("staircase: truncation exceeds number of radii");
  SeriesCheck c;
  for (std::size_t n = 0; n < N; ++n) c.partial_sum += staircase_term(spec, n);
  if (N <= 1) return c;
  const double uN = staircase_term(spec, N - 1);
  const double uP = staircase_term(spec, N - 2);
  c.last_ratio = uN / uP;
  // geometric decay, or power-law decay n^{-p} with p clearly above 1
  const double p = std::log(uP / uN) / std::log(double(N) / double(N - 1));
  if (c.last_ratio <= 0.95) {
    c.tail_estimate = uN * c.last_ratio / (1.0 - c.last_ratio);
  } else if (p > 1.1) {
    c.tail_estimate = uN * double(N) / (p - 1.0);
  } else {
    c.converges = false;
    c.tail_estimate = std::numeric_limits<double>::infinity();
  }
  return c;
}

DecayCurve make_staircase(const StaircaseSpec& spec, std::size_t N) {
  if (N > spec.radii.size()) throw PreconditionError("staircase: truncation exceeds number of radii");
  for (std::size_t i = 0; i < N; ++i) {
    if (!(spec.radii[i] > 0.0)) throw PreconditionError("staircase: radii must be positive");
    if (i && !(spec.radii[i] > spec.radii[i - 1]))
      throw PreconditionError("staircase: radii must be strictly increasing");
  }
  const SeriesCheck sc = check_staircase_series(spec, N);
  if (!sc.converges)
    throw PreconditionError(fmt::format("staircase: weight series looks divergent at N={} (ratio {:.4f})", N,
                                        sc.last_ratio));

  nlohmann::json desc = {{"variant", variant_name(spec.variant)},
                         {"phi_family", spec.phi.family},
                         {"phi_params", params_json(spec.phi.params)},
                         {"radii", std::vector<double>(spec.radii.begin(), spec.radii.begin() + long(N))},
                         {"N", N}};
  const std::string name = "staircase_" + variant_name(spec.variant);

  if (spec.variant == StaircaseVariant::sqrt_steps) {
    std::vector<double> R(spec.radii.begin(), spec.radii.begin() + long(N));
    std::vector<double> w(N), suffix(N + 1, 0.0);
    for (std::size_t n = 0; n < N; ++n) w[n] = 1.0 / (R[n] * std::sqrt(spec.phi(R[n])));
    for (std::size_t n = N; n-- > 0;) suffix[n] = suffix[n + 1] + w[n];
    CurveFns fns;
    // 1_{(0,R_n]}: the first radius with R_n >= t is still active
    fns.eval = [R, suffix](double t) {
      const auto k = std::size_t(std::lower_bound(R.begin(), R.end(), t) - R.begin());
      return suffix[k];
    };
    fns.deriv = [](double) { return 0.0; };
    fns.tail_integral = [R, w](double t) {
      double s = 0.0;
      for (std::size_t n = 0; n < R.size(); ++n) s += w[n] * std::max(R[n] - t, 0.0);
      return s;
    };
    fns.breakpoints = R;
    CurveFlags f;
    f.monotone_decreasing = FlagState::asserted;
    f.limit_zero = FlagState::asserted;
    return DecayCurve(name, std::move(fns), 0.0, f, desc);
  }

  // cbrt_steps: segments (b_{k-1}, b_k] with b_k = 2 R_k, level S_k = sum_{n>=k} c_n
  std::vector<double> b(N), S(N + 1, 0.0), G(N + 1, 0.0), Gint(N + 1, 0.0), Sint(N + 1, 0.0);
  for (std::size_t n = 0; n < N; ++n) b[n] = 2.0 * spec.radii[n];
  for (std::size_t n = N; n-- > 0;)
    S[n] = S[n + 1] + 1.0 / (spec.radii[n] * std::cbrt(spec.phi(spec.radii[n])));
  // G[k] = g(b_k) (0-based: value at the right end of segment k); Gint/Sint are
  // integrals of g and sqrt(-g') over all segments after k.
  for (std::size_t k = N; k-- > 0;) {
    const double len_next = k + 1 < N ? b[k + 1] - b[k] : 0.0;
    const double s_next = k + 1 < N ? S[k + 1] : 0.0;
    G[k] = G[k + 1] + s_next * s_next * len_next;
    Gint[k] = Gint[k + 1] + G[k + 1] * len_next + s_next * s_next * len_next * len_next / 2.0;
    Sint[k] = Sint[k + 1] + s_next * len_next;
  }
  auto seg = [b](double t) { return std::size_t(std::upper_bound(b.begin(), b.end(), t) - b.begin()); };
  CurveFns fns;
  fns.eval = [b, S, G, seg](double t) {
    const std::size_t k = seg(t);
    if (k == b.size()) return 0.0;
    return G[k] + S[k] * S[k] * (b[k] - t);
  };
  fns.deriv = [b, S, seg](double t) {
    const std::size_t k = seg(t);
    return k == b.size() ? 0.0 : -S[k] * S[k];
  };
  fns.tail_integral = [b, S, G, Gint, seg](double t) {
    const std::size_t k = seg(t);
    if (k == b.size()) return 0.0;
    const double d = b[k] - t;
    return Gint[k] + G[k] * d + S[k] * S[k] * d * d / 2.0;
  };
  fns.sqrt_deriv_tail = [b, S, Sint, seg](double t) {
    const std::size_t k = seg(t);
    if (k == b.size()) return 0.0;
    return Sint[k] + S[k] * (b[k] - t);
  };
  fns.breakpoints = b;
  return DecayCurve(name, std::move(fns), 0.0, all_asserted(true), desc);
}

double staircase_integral_formula(const StaircaseSpec& spec, std::size_t N) {
  double s = 0.0;
  if (spec.variant == StaircaseVariant::sqrt_steps) {
    for (std::size_t n = 0; n < N; ++n) s += 1.0 / std::sqrt(spec.phi(spec.radii[n]));
    return s;
  }
  // int_0^inf g = int_0^inf t (sqrt(-g'))^2 dt = sum_{n,m} c_n c_m 2 min(R_n, R_m)^2
  std::vector<double> c(N);
  for (std::size_t n = 0; n < N; ++n) c[n] = 1.0 / (spec.radii[n] * std::cbrt(spec.phi(spec.radii[n])));
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t m = 0; m < N; ++m) {
      const double r = std::min(spec.radii[n], spec.radii[m]);
      s += c[n] * c[m] * 2.0 * r * r;
    }
  return s;
}

double staircase_sqrt_deriv_formula(const StaircaseSpec& spec, std::size_t N) {
  if (spec.variant != StaircaseVariant::cbrt_steps)
    throw PreconditionError("sqrt-derivative formula only applies to cbrt_steps");
  double s = 0.0;
  for (std::size_t n = 0; n < N; ++n) s += 2.0 / std::cbrt(spec.phi(spec.radii[n]));
  return s;
}

namespace {

std::map<std::string, double> params_from_json(const nlohmann::json& j) {
  std::map<std::string, double> p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error("curve params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = it.value().get<double>();
  return p;
}

FlagState flag_from_string(const std::string& s) {
  if (s == "asserted") return FlagState::asserted;
  if (s == "verified") return FlagState::verified;
  if (s == "unknown") return FlagState::unknown;
  throw Error("unknown flag state '" + s + "'");
}

}  // namespace

DecayCurve curve_from_json(const nlohmann::json& doc) {
  DecayCurve c = [&] {
    if (doc.contains("family"))
      return make_named_curve(doc.at("family").get<std::string>(), params_from_json(doc.value("params", nlohmann::json())));
    if (doc.contains("variant")) {
      StaircaseSpec spec;
      const auto v = doc.at("variant").get<std::string>();
      if (v == "sqrt_steps") spec.variant = StaircaseVariant::sqrt_steps;
      else if (v == "cbrt_steps") spec.variant = StaircaseVariant::cbrt_steps;
      else throw Error("unknown staircase variant '" + v + "'");
      spec.phi = RateFunction::named(doc.at("phi_family").get<std::string>(),
                                     params_from_json(doc.value("phi_params", nlohmann::json())));
      spec.radii = doc.at("radii").get<std::vector<double>>();
      const auto N = doc.value("N", spec.radii.size());
      return make_staircase(spec, N);
    }
    throw Error("curve document needs 'family' or 'variant'");
  }();
  if (doc.contains("flags")) {
    const auto& f = doc.at("flags");
    CurveFlags flags = c.flags();
    if (f.contains("monotone_decreasing")) flags.monotone_decreasing = flag_from_string(f.at("monotone_decreasing"));
    if (f.contains("convex")) flags.convex = flag_from_string(f.at("convex"));
    if (f.contains("limit_zero")) flags.limit_zero = flag_from_string(f.at("limit_zero"));
    if (f.contains("sqrt_deriv_integrable"))
      flags.sqrt_deriv_integrable = flag_from_string(f.at("sqrt_deriv_integrable"));
    c = c.with_flags(flags);
  }
  return c;
}

FlagCheckResult verify_flags(const DecayCurve& curve, const std::vector<double>& grid, const FlagCheckOptions& opt) {
  FlagCheckResult r{curve, true, true, true, true, 0.0, {}};
  if (grid.size() < 2) throw PreconditionError("verify_flags: need at least two grid points");
  std::vector<double> g(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < curve.t_min()) throw PreconditionError("verify_flags: grid point below t_min");
    if (i && !(grid[i] > grid[i - 1])) throw PreconditionError("verify_flags: grid must be increasing");
    g[i] = curve(grid[i]);
    d[i] = curve.deriv(grid[i]);
  }
  const double tol = opt.rel_tol_analytic;
  double gscale = 0.0;
  for (double v : g) gscale = std::max(gscale, std::abs(v));
  const double abs_tol = tol * gscale;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (g[i] < -abs_tol) {
      r.nonnegative = false;
      r.messages.push_back(fmt::format("g({}) = {} < 0", grid[i], g[i]));
      break;
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool up = i + 1 < grid.size() && g[i + 1] > g[i] + tol * std::abs(g[i]) + abs_tol * 1e-8;
    if (up || d[i] > tol * std::max(std::abs(d[i]), 1e-300)) {
      r.monotone = false;
      r.messages.push_back(fmt::format("not monotone decreasing near t = {}", grid[i]));
      break;
    }
  }
  for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
    const double s1 = (g[i + 1] - g[i]) / (grid[i + 1] - grid[i]);
    const double s2 = (g[i + 2] - g[i + 1]) / (grid[i + 2] - grid[i + 1]);
    const double slack = tol * (std::abs(s1) + std::abs(s2)) + 4.0 * std::numeric_limits<double>::epsilon() *
                                                                     (std::abs(g[i]) + std::abs(g[i + 1])) /
                                                                     (grid[i + 2] - grid[i + 1]);
    if (s2 < s1 - slack || d[i + 1] < d[i] - tol * (std::abs(d[i]) + std::abs(d[i + 1]))) {
      r.convex = false;
      r.messages.push_back(fmt::format("convexity violated near t = {}", grid[i + 1]));
      break;
    }
  }
  const auto& bps = curve.breakpoints();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double h = 1e-3 * std::max(1e-2, std::abs(t));
    const auto it = std::lower_bound(bps.begin(), bps.end(), t);
    if (it != bps.end() && *it <= t + h) continue;  // skip cells touching a kink
    const double fd = (curve(t + h) - curve(t)) / h;
    const double dm = curve.deriv(t + h / 2);
    const double scale = std::max(std::abs(dm), 1e-12 * std::max(std::abs(g[i]), 1e-300));
    const double res = std::abs(fd - dm) / scale;
    r.worst_fd_residual = std::max(r.worst_fd_residual, res);
    if (res > opt.rel_tol_fd && std::abs(fd - dm) > 64 * std::numeric_limits<double>::epsilon() * std::abs(g[i]) / h) {
      r.fd_consistent = false;
    }
  }
  if (!r.fd_consistent) r.messages.push_back(fmt::format("finite-difference residual {:.3g}", r.worst_fd_residual));

  CurveFlags f = curve.flags();
  auto settle = [&](FlagState& s, bool ok, const char* name) {
    if (ok) {
      s = FlagState::verified;
    } else if (s != FlagState::unknown) {
      r.messages.push_back(fmt::format("asserted flag '{}' failed its grid check", name));
      s = FlagState::unknown;
    }
  };
  settle(f.monotone_decreasing, r.monotone && r.nonnegative, "monotone_decreasing");
  settle(f.convex, r.convex && r.monotone, "convex");
  if (r.monotone && r.nonnegative && curve.has_tail_integral()) {
    const auto tail = curve.tail_integral(grid.back());
    if (tail && std::isfinite(*tail)) f.limit_zero = FlagState::verified;
  }
  if (curve.has_sqrt_deriv_tail()) {
    const auto tail = curve.sqrt_deriv_tail(grid.back());
    if (tail && std::isfinite(*tail)) f.sqrt_deriv_integrable = FlagState::verified;
  }
  r.curve = curve.with_flags(f);
  return r;
}

SqrtDerivIntegral sqrt_deriv_integral(const DecayCurve& curve, double T, std::size_t cells, Exec exec) {
  const double a = curve.t_min();
  if (!(T > a)) throw PreconditionError("sqrt_deriv_integral: need T > t_min");
  if (cells == 0) throw PreconditionError("sqrt_deriv_integral: need at least one cell");
  if (!holds(curve.flags().monotone_decreasing))
    throw PreconditionError("sqrt_deriv_integral: curve is not known to be monotone decreasing");
  const double h = (T - a) / double(cells);
  std::vector<double> node(cells + 1);
  parallel_for(cells + 1, exec, [&](std::size_t i) {
    const double t = i == cells ? T : a + (T - a) * (double(i) / double(cells));
    node[i] = curve(t);
  });
  const double scale = std::max(std::abs(node.front()), 1e-300);
  for (std::size_t i = 0; i < cells; ++i) {
    if (node[i + 1] - node[i] > 1e-13 * scale)
      throw PreconditionError(fmt::format("sqrt_deriv_integral: curve increases on cell [{}, {}]",
                                          a + h * double(i), a + h * double(i + 1)));
  }
  SqrtDerivIntegral out;
  out.cells = cells;
  out.value = chunked_sum(cells, exec, [&](std::size_t i) {
    return std::sqrt(h * std::max(node[i] - node[i + 1], 0.0));
  });
  if (holds(curve.flags().convex)) {
    out.error_bound = h * (std::sqrt(std::max(-curve.deriv(a), 0.0)) - std::sqrt(std::max(-curve.deriv(T), 0.0)));
    out.error_bound = std::max(out.error_bound, 0.0);
  } else {
    out.error_bound = std::numeric_limits<double>::infinity();
  }
  out.lower = out.value - out.error_bound;
  out.tail = curve.sqrt_deriv_tail(T);
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * (double(i) / double(n - 1));
  v.back() = b;
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !(b > 0.0)) throw PreconditionError("logspace: endpoints must be positive");
  std::vector<double> v = linspace(std::log(a), std::log(b), n);
  for (double& x : v) x = std::exp(x);
  if (!v.empty()) {
    v.front() = a;
    v.back() = b;
  }
  return v;
}

}  // namespace decaylab
