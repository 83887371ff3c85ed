#include "decaylab/sqrtcompare.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "decaylab/csv.hpp"
#include "decaylab/error.hpp"
#include "decaylab/majorize.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/rng.hpp"

namespace decaylab {

namespace {

constexpr double kEps = 2.220446049250313e-16;

double grid_point(double t0, double T, std::size_t N, std::size_t i) {
  return i == N ? T : t0 + (T - t0) * (double(i) / double(N));
}

double concave_sum(const std::vector<double>& v, const std::function<double(double)>& c) {
  double s = 0.0;
  for (double x : v) s += c ? c(x) : std::sqrt(std::max(x, 0.0));
  return s;
}

// Increments as exact differences of the rounded grid values, so that they
// telescope to g(t0) exactly; the double increments may not.
std::vector<mpq_class> exact_increments(const DecayCurve& c, const Increments& inc) {
  const std::size_t N = inc.a.size() - 1;
  std::vector<mpq_class> q(N + 1);
  mpq_class prev(c(inc.t0));
  for (std::size_t i = 1; i <= N; ++i) {
    mpq_class cur(c(grid_point(inc.t0, inc.T, N, i)));
    q[i - 1] = prev - cur;
    prev = cur;
  }
  q[N] = prev;
  return q;
}

bool exact_tail_dominance(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b) {
  mpq_class sa(0), sb(0);
  for (std::size_t i = a.size(); i-- > 0;) {
    sa += a[i];
    sb += b[i];
    if (sb < sa) return false;
  }
  return true;
}

bool exactly_ordered(const std::vector<mpq_class>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (sgn(v[i]) < 0 || (i > 0 && v[i] > v[i - 1])) return false;
  return true;
}

double riemann(const Increments& inc) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < inc.a.size(); ++i) s += std::sqrt(inc.h * std::max(inc.a[i], 0.0));
  return s;
}

double riemann_error(const DecayCurve& c, const Increments& inc) {
  const double e = inc.h * (std::sqrt(std::max(-c.deriv(inc.t0), 0.0)) - std::sqrt(std::max(-c.deriv(inc.T), 0.0)));
  return std::max(e, 0.0);
}

}  // namespace

std::string to_string(Certificate c) { return c == Certificate::majorization ? "majorization" : "direct"; }

Increments discretize_increments(const DecayCurve& curve, double T, std::size_t N) {
  const auto& f = curve.flags();
  if (!holds(f.monotone_decreasing) || !holds(f.convex))
    throw PreconditionError(fmt::format("increments: curve '{}' is not known to be convex and decreasing", curve.name()));
  if (N == 0) throw PreconditionError("increments: need N >= 1");
  const double t0 = curve.t_min();
  if (!(T > t0)) throw PreconditionError("increments: need T > t_min");
  const double g0 = curve(t0);
  if (!std::isfinite(g0)) throw PreconditionError("increments: g(t_min) is not finite");
  Increments inc;
  inc.t0 = t0;
  inc.T = T;
  inc.h = (T - t0) / double(N);
  inc.a.resize(N + 1);
  double prev = g0;
  const double tol = 1e-13 * std::max(std::abs(g0), 1e-300);
  for (std::size_t i = 1; i <= N; ++i) {
    const double cur = curve(grid_point(t0, T, N, i));
    inc.a[i - 1] = prev - cur;
    prev = cur;
    if (inc.a[i - 1] < -tol)
      throw PreconditionError(fmt::format("increments: negative increment on cell {} (curve increases)", i));
    if (i > 1 && inc.a[i - 1] - inc.a[i - 2] > tol)
      throw PreconditionError(fmt::format("increments: increment {} exceeds increment {} (curve not convex)", i, i - 1));
  }
  inc.a[N] = prev;
  inc.tail_ordered = inc.a[N] <= inc.a[N - 1];
  return inc;
}

nlohmann::json SqrtComparison::summary_json() const {
  return {{"N", a.a.size() - 1},
          {"T", a.T},
          {"tail_dominance", tail_dominance},
          {"certificate", to_string(certificate)},
          {"map_entries", map_entries},
          {"sum_sqrt_a", sum_sqrt_a},
          {"sum_sqrt_b", sum_sqrt_b},
          {"holds", holds},
          {"tail_ordered_a", a.tail_ordered},
          {"tail_ordered_b", b.tail_ordered},
          {"riemann_g", riemann_g},
          {"riemann_G", riemann_G},
          {"riemann_error_g", riemann_error_g},
          {"riemann_error_G", riemann_error_G}};
}

void SqrtComparison::write_csv(const std::filesystem::path& path) const {
  CsvWriter w(path, {"i", "a_i", "b_i", "sqrt_a_i", "sqrt_b_i"});
  for (std::size_t i = 0; i < a.a.size(); ++i)
    w.row({double(i + 1), a.a[i], b.a[i], std::sqrt(std::max(a.a[i], 0.0)), std::sqrt(std::max(b.a[i], 0.0))});
}

SqrtComparison compare_sqrt_integrals(const DecayCurve& g, const DecayCurve& G, double T, std::size_t N,
                                      const CompareOptions& opt) {
  if (g.t_min() != G.t_min()) throw PreconditionError("sqrt comparison: curves start at different t_min");
  const double t0 = g.t_min();
  for (std::size_t i = 0; i <= N; ++i) {
    const double t = grid_point(t0, T, N, i);
    if (G(t) < g(t))
      throw PreconditionError(fmt::format("sqrt comparison: G < g at grid point t = {} ({} < {})", t, G(t), g(t)));
  }
  SqrtComparison r;
  r.a = discretize_increments(g, T, N);
  r.b = discretize_increments(G, T, N);
  const auto qa = exact_increments(g, r.a), qb = exact_increments(G, r.b);
  r.tail_dominance = exact_tail_dominance(qa, qb);
  r.sum_sqrt_a = concave_sum(r.a.a, opt.concave);
  r.sum_sqrt_b = concave_sum(r.b.a, opt.concave);
  if (N + 1 <= opt.majorize_cap && r.tail_dominance && exactly_ordered(qa) && exactly_ordered(qb)) {
    const SequencePair pair{qa, qb};
    const auto map = build_averaging_map(pair, {opt.majorize_cap});
    const auto cert = jensen_sqrt_certificate(pair, map, opt.concave);
    r.certificate = Certificate::majorization;
    r.map_entries = map.entries.size();
    r.holds = cert.holds;
  } else {
    const double slack = 4.0 * double(N + 2) * kEps * std::max({1.0, r.sum_sqrt_a, r.sum_sqrt_b});
    r.certificate = Certificate::direct;
    r.holds = r.sum_sqrt_b >= r.sum_sqrt_a - slack;
  }
  r.riemann_g = riemann(r.a);
  r.riemann_G = riemann(r.b);
  r.riemann_error_g = riemann_error(g, r.a);
  r.riemann_error_G = riemann_error(G, r.b);
  return r;
}

nlohmann::json FuzzReport::to_json() const {
  nlohmann::json j{{"trials", trials},
                   {"ordered_trials", ordered_trials},
                   {"violations", violations},
                   {"tail_order_failures", tail_order_failures},
                   {"majorization_certified", majorization_certified}};
  j["reproducers"] = nlohmann::json::array();
  for (const auto& r : reproducers)
    j["reproducers"].push_back({{"trial", r.trial},
                                {"N", r.N},
                                {"T", r.T},
                                {"g", r.g},
                                {"G", r.G},
                                {"sum_sqrt_a", r.sum_sqrt_a},
                                {"sum_sqrt_b", r.sum_sqrt_b}});
  return j;
}

DecayCurve random_convex_curve(std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  struct Term {
    int kind;
    double A, r, c;
  };
  std::vector<Term> terms(1 + rng.next_u64() % 3);
  nlohmann::json desc{{"family", "random_convex"}, {"seed", seed}, {"stream", stream}};
  desc["terms"] = nlohmann::json::array();
  std::vector<double> breaks;
  for (auto& tm : terms) {
    tm.kind = int(rng.next_u64() % 3);
    tm.A = unif(0.1, 2.0);
    if (tm.kind == 0) {
      tm.r = unif(0.05, 3.0);
      desc["terms"].push_back({{"kind", "exponential"}, {"amplitude", tm.A}, {"rate", tm.r}});
    } else if (tm.kind == 1) {
      tm.r = unif(0.5, 3.0);
      tm.c = unif(0.2, 3.0);
      desc["terms"].push_back({{"kind", "inverse_power"}, {"amplitude", tm.A}, {"power", tm.r}, {"shift", tm.c}});
    } else {
      tm.r = unif(0.05, 2.0);
      breaks.push_back(1.0 / tm.r);
      desc["terms"].push_back({{"kind", "linear_cutoff"}, {"amplitude", tm.A}, {"rate", tm.r}});
    }
  }
  std::sort(breaks.begin(), breaks.end());
  CurveFns fns;
  fns.eval = [terms](double t) {
    double s = 0.0;
    for (const auto& tm : terms) {
      if (tm.kind == 0) s += tm.A * std::exp(-tm.r * t);
      else if (tm.kind == 1) s += tm.A * std::pow(tm.c + t, -tm.r);
      else s += tm.A * std::max(1.0 - tm.r * t, 0.0);
    }
    return s;
  };
  fns.deriv = [terms](double t) {
    double s = 0.0;
    for (const auto& tm : terms) {
      if (tm.kind == 0) s -= tm.A * tm.r * std::exp(-tm.r * t);
      else if (tm.kind == 1) s -= tm.A * tm.r * std::pow(tm.c + t, -tm.r - 1.0);
      else if (tm.r * t < 1.0) s -= tm.A * tm.r;
    }
    return s;
  };
  fns.breakpoints = breaks;
  CurveFlags fl{FlagState::asserted, FlagState::asserted, FlagState::asserted, FlagState::unknown};
  return DecayCurve(fmt::format("random_convex_{}_{}", seed, stream), std::move(fns), 0.0, fl, desc);
}

namespace {

DecayCurve combine(const DecayCurve& f, const DecayCurve& g, bool take_max) {
  CurveFns fns;
  if (take_max) {
    fns.eval = [f, g](double t) { return std::max(f(t), g(t)); };
    fns.deriv = [f, g](double t) {
      const double a = f(t), b = g(t);
      if (a != b) return a > b ? f.deriv(t) : g.deriv(t);
      return std::max(f.deriv(t), g.deriv(t));
    };
  } else {
    fns.eval = [f, g](double t) { return f(t) + g(t); };
    fns.deriv = [f, g](double t) { return f.deriv(t) + g.deriv(t); };
  }
  fns.breakpoints = f.breakpoints();
  fns.breakpoints.insert(fns.breakpoints.end(), g.breakpoints().begin(), g.breakpoints().end());
  std::sort(fns.breakpoints.begin(), fns.breakpoints.end());
  auto both = [](FlagState a, FlagState b) { return holds(a) && holds(b) ? FlagState::asserted : FlagState::unknown; };
  const auto &ff = f.flags(), &gf = g.flags();
  CurveFlags fl{both(ff.monotone_decreasing, gf.monotone_decreasing), both(ff.convex, gf.convex),
                both(ff.limit_zero, gf.limit_zero), both(ff.sqrt_deriv_integrable, gf.sqrt_deriv_integrable)};
  nlohmann::json desc = nullptr;
  if (!f.description().is_null() && !g.description().is_null())
    desc = {{"family", take_max ? "max" : "sum"}, {"terms", {f.to_json(), g.to_json()}}};
  return DecayCurve(fmt::format("{}({},{})", take_max ? "max" : "sum", f.name(), g.name()), std::move(fns),
                    std::max(f.t_min(), g.t_min()), fl, desc);
}

}  // namespace

DecayCurve sum_curve(const DecayCurve& f, const DecayCurve& g) { return combine(f, g, false); }
DecayCurve max_curve(const DecayCurve& f, const DecayCurve& g) { return combine(f, g, true); }

FuzzReport fuzz_counterexample_search(const FuzzOptions& opt) {
  struct Outcome {
    bool ordered = false, holds = true, majorized = false;
    std::size_t N = 0;
    double T = 0.0, sa = 0.0, sb = 0.0;
  };
  std::vector<Outcome> out(opt.trials);
  CompareOptions copt;
  copt.concave = opt.concave;
  auto curves = [&](std::size_t k) {
    const DecayCurve g = random_convex_curve(opt.seed, 2 * k);
    const DecayCurve other = random_convex_curve(opt.seed, 2 * k + 1);
    return std::pair{g, opt.mode == FuzzMode::bump ? sum_curve(g, other) : max_curve(g, other)};
  };
  parallel_for(opt.trials, opt.exec, [&](std::size_t k) {
    CounterRng rng(opt.seed ^ 0x5eedf00dULL, k);
    const std::size_t N = 1 + rng.next_u64() % std::max<std::size_t>(opt.max_N, 1);
    const double T = 0.5 + 19.5 * rng.uniform();
    const auto [g, G] = curves(k);
    const auto r = compare_sqrt_integrals(g, G, T, N, copt);
    out[k] = {r.a.tail_ordered && r.b.tail_ordered, r.holds, r.certificate == Certificate::majorization, N, T,
              r.sum_sqrt_a, r.sum_sqrt_b};
  });
  FuzzReport rep;
  rep.trials = opt.trials;
  for (std::size_t k = 0; k < opt.trials; ++k) {
    const auto& o = out[k];
    if (o.ordered) ++rep.ordered_trials;
    if (o.majorized) ++rep.majorization_certified;
    if (o.holds) continue;
    if (o.ordered) ++rep.violations;
    else ++rep.tail_order_failures;
    if (rep.reproducers.size() >= opt.max_reproducers) continue;
    const auto [g, G] = curves(k);
    FuzzReproducer rp{k, o.N, o.T, g.to_json(), G.to_json(), o.sa, o.sb};
    while (rp.N > 1) {
      const auto r = compare_sqrt_integrals(g, G, o.T, rp.N / 2, copt);
      if (r.holds) break;
      rp.N /= 2;
      rp.sum_sqrt_a = r.sum_sqrt_a;
      rp.sum_sqrt_b = r.sum_sqrt_b;
    }
    rep.reproducers.push_back(std::move(rp));
  }
  return rep;
}

BarrierResult barrier_experiment(double alpha, double T_lo, double T_hi, double h, Exec exec) {
  if (!(alpha > 1.0)) throw PreconditionError("barrier: need alpha > 1");
  if (!(T_hi > T_lo) || !(T_lo > 2.0) || !(h > 0.0)) throw PreconditionError("barrier: need 2 < T_lo < T_hi, h > 0");
  const DecayCurve g = make_named_curve(CurveFamily::power_log, {{"alpha", alpha}});
  BarrierResult r;
  r.alpha = alpha;
  r.estimate_lo = sqrt_deriv_integral(g, T_lo, std::size_t(std::ceil((T_lo - 2.0) / h)), exec).value;
  r.estimate_hi = sqrt_deriv_integral(g, T_hi, std::size_t(std::ceil((T_hi - 2.0) / h)), exec).value;
  r.growth = r.estimate_hi - r.estimate_lo;
  r.integral_hi = integrate([&](double t) { return g(t); }, 2.0, T_hi, logspace(2.0, T_hi, 64)).value;
  r.integral_closed_form = std::pow(std::log(2.0), 1.0 - alpha) / (alpha - 1.0);
  return r;
}

}  // namespace decaylab
