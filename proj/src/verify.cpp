#include "decaylab/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "decaylab/csv.hpp"
#include "decaylab/error.hpp"
#include "decaylab/parallel.hpp"

namespace decaylab {

namespace {

const std::vector<double>& require_xstar(const Trajectory& tr, const char* what) {
  if (!tr.meta().xstar) throw PreconditionError(fmt::format("{}: trajectory has no minimizer x*", what));
  if (tr.meta().xstar->size() != tr.dim()) throw PreconditionError(fmt::format("{}: x* has wrong dimension", what));
  return *tr.meta().xstar;
}

double dist_sq(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

bool close_param(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

double product_weight(ProductWeight w, double t) {
  switch (w) {
    case ProductWeight::t: return t;
    case ProductWeight::t_log_t: return t * std::log(t);
    case ProductWeight::t_log2_t: return t * std::log(t) * std::log(t);
    case ProductWeight::t2: return t * t;
  }
  return t;
}

std::string weight_name(ProductWeight w) {
  switch (w) {
    case ProductWeight::t: return "t";
    case ProductWeight::t_log_t: return "t_log_t";
    case ProductWeight::t_log2_t: return "t_log2_t";
    case ProductWeight::t2: return "t2";
  }
  return "t";
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

void DecayReport::settle() {
  verdict = Verdict::pass;
  worst_margin = series.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& p : series) {
    worst_margin = std::min(worst_margin, p.rhs - p.lhs);
    if (!(p.lhs <= p.rhs + tolerance)) verdict = Verdict::fail;
  }
}

Verdict DecayReport::overall() const {
  Verdict v = verdict;
  for (const auto& c : children) {
    const Verdict cv = c.overall();
    if (cv == Verdict::fail) return Verdict::fail;
    if (cv == Verdict::inconclusive) v = v == Verdict::fail ? v : Verdict::inconclusive;
  }
  return v;
}

const DecayReport* DecayReport::child(const std::string& n) const {
  for (const auto& c : children)
    if (c.name == n) return &c;
  return nullptr;
}

nlohmann::json DecayReport::summary_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["verdict"] = to_string(verdict);
  j["overall"] = to_string(overall());
  j["margin"] = worst_margin;
  j["tolerance"] = tolerance;
  j["samples"] = series.size();
  if (!note.empty()) j["note"] = note;
  if (!values.empty()) j["values"] = values;
  if (!children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : children) j["children"].push_back(c.summary_json());
  }
  return j;
}

void DecayReport::write_csv(const std::filesystem::path& path) const {
  CsvWriter w(path, {"t", "lhs", "rhs"});
  for (const auto& p : series) w.row({p.t, p.lhs, p.rhs});
}

DecayReport make_report(std::string name, std::vector<ReportPoint> series, double tol) {
  DecayReport r;
  r.name = std::move(name);
  r.series = std::move(series);
  r.tolerance = tol;
  r.settle();
  return r;
}

DecayReport lyapunov_gf(const Trajectory& tr, std::optional<double> tol) {
  const auto& xs = require_xstar(tr, "lyapunov_gf");
  std::vector<double> L(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) L[i] = tr.t(i) * tr.excess(i) + 0.5 * dist_sq(tr.x(i), xs);
  const double L0 = L.empty() ? 0.0 : L[0];
  const double tl = tol.value_or(10.0 * tr.meta().param("rtol").value_or(1e-9) * std::max(L0, 1.0));
  std::vector<ReportPoint> s;
  for (std::size_t i = 1; i < L.size(); ++i) s.push_back({tr.t(i), L[i], L[i - 1]});
  DecayReport r = make_report("lyapunov_gf", std::move(s), tl);
  r.values["L0"] = L0;
  std::vector<ReportPoint> c;
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr.t(i) > 0.0) c.push_back({tr.t(i), tr.excess(i), L0 / tr.t(i)});
  r.children.push_back(make_report("excess_le_L0_over_t", std::move(c), tl));
  return r;
}

DecayReport excess_integral(const Trajectory& tr, ExcessWeight weight, std::optional<double> alpha) {
  const auto& xs = require_xstar(tr, "excess_integral");
  if (tr.empty()) throw PreconditionError("excess_integral: empty trajectory");
  const double d0 = dist_sq(tr.x(0), xs);
  double bound = 0.5 * d0;
  std::string name = "excess_integral";
  double constant = 0.5;
  if (weight == ExcessWeight::t) {
    const auto a = alpha ? alpha : tr.meta().param("alpha");
    if (!a) throw PreconditionError("excess_integral: weight t needs alpha");
    if (!(*a > 3.0)) throw PreconditionError("excess_integral: weight t needs alpha > 3");
    constant = (*a - 1.0) * (*a - 1.0) / (2.0 * (*a - 3.0));
    bound = constant * d0;
    name = "t_excess_integral";
  }
  auto w = [&](std::size_t i) { return weight == ExcessWeight::t ? tr.t(i) : 1.0; };
  std::vector<ReportPoint> s;
  double acc = 0.0;
  s.push_back({tr.t(0), 0.0, bound});
  for (std::size_t i = 1; i < tr.size(); ++i) {
    acc += 0.5 * (tr.t(i) - tr.t(i - 1)) * (w(i) * tr.excess(i) + w(i - 1) * tr.excess(i - 1));
    s.push_back({tr.t(i), acc, bound});
  }
  DecayReport r = make_report(name, std::move(s), 1e-9 * std::max(1.0, bound));
  r.values["integral"] = acc;
  r.values["bound"] = bound;
  r.values["constant"] = constant;
  return r;
}

DecayReport decay_products(const Trajectory& tr, ProductWeight weight, const ProductOptions& opt) {
  DecayReport r;
  r.name = fmt::format("{}_{}_excess", opt.mode == LimitMode::lim ? "lim" : "liminf", weight_name(weight));
  r.tolerance = 0.0;
  if (tr.empty()) throw PreconditionError("decay_products: empty trajectory");
  const double t_end = tr.t(tr.size() - 1);
  const double t_tail = std::max(opt.tail_start_fraction * t_end, weight == ProductWeight::t ||
                                                                          weight == ProductWeight::t2
                                                                      ? 0.0
                                                                      : 1.0);
  double sup = 0.0, inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.t(i) < t_tail || (tr.t(i) <= 1.0 && weight != ProductWeight::t && weight != ProductWeight::t2)) continue;
    const double p = product_weight(weight, tr.t(i)) * tr.excess(i);
    r.series.push_back({tr.t(i), p, opt.threshold});
    sup = std::max(sup, p);
    inf = std::min(inf, p);
  }
  r.values["tail_sup"] = sup;
  r.values["tail_inf"] = inf;
  r.values["tail_start"] = t_tail;
  r.values["threshold"] = opt.threshold;
  if (t_end < opt.min_horizon || r.series.empty()) {
    r.verdict = Verdict::inconclusive;
    r.note = fmt::format("horizon {} shorter than required {}", t_end, opt.min_horizon);
    return r;
  }
  if (opt.mode == LimitMode::lim) {
    r.worst_margin = opt.threshold - sup;
    r.verdict = sup <= opt.threshold ? Verdict::pass : Verdict::fail;
  } else {
    r.worst_margin = opt.threshold - inf;
    r.verdict = inf <= opt.threshold ? Verdict::pass : Verdict::inconclusive;
    if (r.verdict == Verdict::inconclusive) r.note = "running inf never dropped below the threshold";
  }
  return r;
}

DecayReport best_iterate_bound(const Trajectory& tr, double t) {
  if (!(t > std::numbers::e)) throw PreconditionError("best_iterate_bound: need t > e");
  const auto& xs = require_xstar(tr, "best_iterate_bound");
  const double hi = t * std::log(t);
  if (tr.empty() || tr.t(0) > t || tr.t(tr.size() - 1) < hi)
    throw PreconditionError(fmt::format("best_iterate_bound: samples do not cover [{}, {}]", t, hi));
  auto interp = [&](double s) {
    const auto& T = tr.times();
    auto it = std::lower_bound(T.begin(), T.end(), s);
    const std::size_t j = std::size_t(it - T.begin());
    if (T[j] == s) return s * tr.excess(j);
    const double th = (s - T[j - 1]) / (T[j] - T[j - 1]);
    return s * ((1.0 - th) * tr.excess(j - 1) + th * tr.excess(j));
  };
  double m = std::min(interp(t), interp(hi));
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr.t(i) >= t && tr.t(i) <= hi) m = std::min(m, tr.t(i) * tr.excess(i));
  const double bound = dist_sq(tr.x(0), xs) / (2.0 * std::log(std::log(t)));
  DecayReport r = make_report("best_iterate", {{t, m, bound}}, 0.0);
  r.values["window_end"] = hi;
  return r;
}

double polyline_length(const Trajectory& tr) {
  double L = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) L += std::sqrt(dist_sq(tr.x(i), tr.x(i - 1)));
  return L;
}

double path_length(const Trajectory& tr) {
  const auto& k = tr.meta().kind;
  if (k == "gd" || k == "sgd" || k == "heavy_ball_scheme") return polyline_length(tr);
  auto speed = [&](std::size_t i) { return tr.has_velocity() ? std::sqrt(norm_sq(tr.v(i))) : tr.gnorm(i); };
  double L = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) L += 0.5 * (tr.t(i) - tr.t(i - 1)) * (speed(i) + speed(i - 1));
  return L;
}

DecayReport length_bound(const Trajectory& tr) {
  const auto& xs = require_xstar(tr, "length_bound");
  if (tr.empty()) throw PreconditionError("length_bound: empty trajectory");
  // the unobserved rest of the path is replaced by the distance to x*, exact
  // for monotone 1D flows
  const double len = path_length(tr) + std::sqrt(dist_sq(tr.x(tr.size() - 1), xs));
  std::vector<ReportPoint> s;
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr.t(i) > 0.0) s.push_back({tr.t(i), tr.excess(i), len * len / (4.0 * tr.t(i))});
  DecayReport r = make_report("length_bound", std::move(s), 1e-6 * std::max(1.0, len * len));
  r.values["length"] = len;
  return r;
}

DecayReport self_contracting_check(const Trajectory& tr, const SelfContractOptions& opt) {
  std::vector<std::size_t> idx;
  const std::size_t n = tr.size();
  if (n <= opt.max_points || opt.max_points < 3) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
  } else {
    for (std::size_t k = 0; k < opt.max_points; ++k) idx.push_back(k * (n - 1) / (opt.max_points - 1));
  }
  const std::size_t m = idx.size();
  struct Worst {
    double excess = -std::numeric_limits<double>::infinity();
    std::size_t i = 0, j = 0;
  };
  std::vector<Worst> worst(m);
  // for each t3 the condition reads d(j,k) <= min_{i<j} d(i,k)
  parallel_for(m, Exec::parallel, [&](std::size_t k) {
    if (k < 2) return;
    double run_min = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    Worst w;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = std::sqrt(dist_sq(tr.x(idx[j]), tr.x(idx[k])));
      if (j > 0 && d - run_min > w.excess) w = {d - run_min, arg, j};
      if (d < run_min) {
        run_min = d;
        arg = j;
      }
    }
    worst[k] = w;
  });
  DecayReport r;
  r.name = "self_contracting";
  r.tolerance = opt.tol;
  std::size_t violations = 0;
  Worst overall;
  std::size_t k_worst = 0;
  for (std::size_t k = 2; k < m; ++k) {
    if (worst[k].excess > opt.tol) ++violations;
    if (worst[k].excess > overall.excess) {
      overall = worst[k];
      k_worst = k;
    }
    r.series.push_back({tr.t(idx[k]), worst[k].excess, 0.0});
  }
  r.settle();
  r.values["violating_t3_count"] = double(violations);
  r.values["checked_points"] = double(m);
  if (violations > 0) {
    const double t1 = tr.t(idx[overall.i]), t2 = tr.t(idx[overall.j]), t3 = tr.t(idx[k_worst]);
    r.values["witness_t1"] = t1;
    r.values["witness_t2"] = t2;
    r.values["witness_t3"] = t3;
    r.values["witness_excess"] = overall.excess;
    r.note = fmt::format("|x(t2)-x(t3)| exceeds |x(t1)-x(t3)| by {} at t1={}, t2={}, t3={}", overall.excess, t1, t2,
                         t3);
  }
  return r;
}

DecayReport gd_sum_bound(const Trajectory& tr, double eta, double L, const GdSumOptions& opt) {
  const auto& xs = require_xstar(tr, "gd_sum_bound");
  const auto& m = tr.meta();
  const bool sgd0 = m.kind == "sgd" && m.param("sigma").value_or(1.0) == 0.0;
  if (m.kind != "gd" && !sgd0) throw PreconditionError("gd_sum_bound: not a gradient-descent trajectory");
  if (auto e = m.param("eta"); e && !close_param(*e, eta))
    throw PreconditionError(fmt::format("gd_sum_bound: eta {} does not match trajectory eta {}", eta, *e));
  if (auto l = m.param("L"); l && !close_param(*l, L))
    throw PreconditionError(fmt::format("gd_sum_bound: L {} does not match trajectory L {}", L, *l));
  if (!(eta > 0.0) || !(L * eta < 2.0)) throw PreconditionError("gd_sum_bound: need 0 < eta < 2/L");
  if (tr.empty()) throw PreconditionError("gd_sum_bound: empty trajectory");
  const double bound = 0.5 * dist_sq(tr.x(0), xs) + eta / (2.0 * (1.0 - L * eta / 2.0)) * tr.excess(0);
  std::vector<ReportPoint> s;
  double acc = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    acc += tr.excess(i);
    s.push_back({tr.t(i), eta * acc, bound});
  }
  DecayReport r = make_report("gd_sum_bound", std::move(s), 1e-12 * std::max(1.0, bound));
  r.values["eta_sum"] = eta * acc;
  r.values["bound"] = bound;
  ProductOptions lim{opt.tail_threshold, LimitMode::lim, 10.0, opt.tail_start_fraction};
  ProductOptions liminf{opt.liminf_threshold, LimitMode::liminf, 10.0, opt.tail_start_fraction};
  r.children.push_back(decay_products(tr, ProductWeight::t, lim));
  r.children.push_back(decay_products(tr, ProductWeight::t_log_t, liminf));
  return r;
}

DecayReport sgd_bounds(const std::vector<Trajectory>& replicas, double eta, double L, double sigma,
                       const SgdBoundOptions& opt) {
  if (replicas.empty()) throw PreconditionError("sgd_bounds: no replicas");
  const auto& m0 = replicas.front().meta();
  const auto& xs = require_xstar(replicas.front(), "sgd_bounds");
  const std::size_t len = replicas.front().size();
  if (len == 0) throw PreconditionError("sgd_bounds: empty replica");
  for (const auto& tr : replicas) {
    const auto& m = tr.meta();
    bool same = m.kind == "sgd" && m.objective_id == m0.objective_id && m.seed == m0.seed && tr.size() == len &&
                tr.dim() == replicas.front().dim();
    for (const char* key : {"eta", "sigma", "N", "noise"}) {
      const auto a = m.param(key), b = m0.param(key);
      same = same && a.has_value() == b.has_value() && (!a || *a == *b);
    }
    for (std::size_t d = 0; same && d < tr.dim(); ++d) same = tr.x(0)[d] == replicas.front().x(0)[d];
    if (!same) throw PreconditionError("sgd_bounds: replicas come from different configurations");
  }
  if (auto e = m0.param("eta"); e && !close_param(*e, eta)) throw PreconditionError("sgd_bounds: eta mismatch");
  if (auto s = m0.param("sigma"); s && !close_param(*s, sigma)) throw PreconditionError("sgd_bounds: sigma mismatch");
  if (auto l = m0.param("L"); l && !close_param(*l, L)) throw PreconditionError("sgd_bounds: L mismatch");

  const double R = double(replicas.size());
  const double q = 1.0 + sigma * sigma;
  const double bound = 0.5 * L * q * dist_sq(replicas.front().x(0), xs) + 2.0 * q * replicas.front().excess(0);
  std::vector<double> cum(replicas.size(), 0.0);
  std::vector<ReportPoint> s;
  double mean = 0.0, se = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      cum[r] += replicas[r].excess(n);
      sum += cum[r];
      sum2 += cum[r] * cum[r];
    }
    mean = sum / R;
    const double var = replicas.size() > 1 ? std::max(sum2 - R * mean * mean, 0.0) / (R - 1.0) : 0.0;
    se = std::sqrt(var / R);
    s.push_back({replicas.front().t(n), mean - 3.0 * se, bound});
  }
  DecayReport rep = make_report("sgd_expected_sum", std::move(s), 1e-12 * std::max(1.0, bound));
  rep.values["mean_sum"] = mean;
  rep.values["standard_error"] = se;
  rep.values["bound"] = bound;
  rep.values["replicas"] = R;
  if (eta > 1.0 / (L * q) * (1.0 + 1e-12))
    rep.note = "eta exceeds 1/(L(1+sigma^2)); the expected-sum bound is not guaranteed";

  const std::size_t tail0 = std::min(len - 1, std::size_t(std::floor(double(len - 1) * (1.0 - opt.tail_fraction))));
  std::size_t bad = 0;
  for (const auto& tr : replicas) {
    double sup = 0.0;
    for (std::size_t n = tail0; n < len; ++n) sup = std::max(sup, tr.excess(n));
    if (sup > opt.eps) ++bad;
  }
  const double frac = double(bad) / R;
  DecayReport as = make_report("as_proxy_tail_fraction", {{replicas.front().t(len - 1), frac, opt.delta}}, 0.0);
  as.values["eps"] = opt.eps;
  as.values["tail_start"] = replicas.front().t(tail0);
  rep.children.push_back(std::move(as));
  if (sigma == 0.0) rep.children.push_back(gd_sum_bound(replicas.front(), eta, L));
  return rep;
}

DecayReport hb_lyapunov(const Trajectory& tr, std::optional<double> alpha, double tol) {
  const auto& xs = require_xstar(tr, "hb_lyapunov");
  if (!tr.has_velocity()) throw PreconditionError("hb_lyapunov: trajectory has no velocities");
  const auto a = alpha ? alpha : tr.meta().param("alpha");
  if (!a) throw PreconditionError("hb_lyapunov: alpha unknown");
  if (!(*a >= 3.0)) throw PreconditionError("hb_lyapunov: need alpha >= 3");
  if (tr.empty()) throw PreconditionError("hb_lyapunov: empty trajectory");
  const std::size_t d = tr.dim();
  std::vector<double> L(tr.size()), dd(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.t(i);
    double q = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double c = (*a - 1.0) * (tr.x(i)[k] - xs[k]) + t * tr.v(i)[k];
      q += c * c;
    }
    L[i] = t * t * tr.excess(i) + 0.5 * q;
    dd[i] = dist_sq(tr.x(i), xs);
  }
  const double L0 = L[0];
  const double tl = tol * std::max(1.0, L0);
  std::vector<ReportPoint> s;
  for (std::size_t i = 1; i < L.size(); ++i) s.push_back({tr.t(i), L[i], L[i - 1]});
  DecayReport r = make_report("hb_lyapunov", std::move(s), tl);
  r.values["L0"] = L0;
  r.values["alpha"] = *a;
  std::vector<ReportPoint> ex, en;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.t(i);
    if (t <= 0.0) continue;
    ex.push_back({t, tr.excess(i), L0 / (t * t)});
    en.push_back({t, t * t * (tr.excess(i) + 0.25 * norm_sq(tr.v(i))), L0 + 0.5 * (*a - 1.0) * (*a - 1.0) * dd[i]});
  }
  r.children.push_back(make_report("excess_le_L0_over_t2", std::move(ex), tl));
  r.children.push_back(make_report("energy_bound", std::move(en), tl));
  return r;
}

DecayReport hb_speed_bound(const Trajectory& tr, const SpeedBoundOptions& opt) {
  if (!tr.has_velocity()) throw PreconditionError("hb_speed_bound: trajectory has no velocities");
  if (tr.empty()) throw PreconditionError("hb_speed_bound: empty trajectory");
  if (norm_sq(tr.v(0)) != 0.0) throw PreconditionError("hb_speed_bound: initial velocity must be zero");
  const double vmax = std::sqrt(2.0 * std::max(tr.excess(0), 0.0));
  std::vector<ReportPoint> s;
  for (std::size_t i = 0; i < tr.size(); ++i) s.push_back({tr.t(i), std::sqrt(norm_sq(tr.v(i))), vmax});
  DecayReport r = make_report("hb_speed", std::move(s), opt.tol);
  r.values["speed_bound"] = vmax;
  if (opt.f1d) {
    if (tr.dim() != 1) throw PreconditionError("hb_speed_bound: f1d needs a 1D trajectory");
    const double x0 = tr.x(0)[0];
    std::vector<ReportPoint> c;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double t = tr.t(i);
      if (t < opt.t_lo || t > opt.t_hi) continue;
      c.push_back({t, opt.f1d(x0 + vmax * t), tr.f(i)});
    }
    DecayReport lo = make_report("value_lower_bound", std::move(c), opt.tol);
    if (lo.series.empty()) {
      lo.verdict = Verdict::inconclusive;
      lo.note = "no samples in the requested window";
    }
    r.children.push_back(std::move(lo));
  }
  return r;
}

}  // namespace decaylab
