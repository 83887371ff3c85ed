#include "decaylab/construct.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "decaylab/csv.hpp"
#include "decaylab/error.hpp"
#include "decaylab/quadrature.hpp"

namespace decaylab {

namespace {

std::string to_string(LeftExtension e) { return e == LeftExtension::quadratic ? "quadratic" : "linear"; }
std::string to_string(RightExtension e) { return e == RightExtension::linear ? "linear" : "exponential_decay"; }

void require_grid(const std::vector<double>& grid, double t_min, const char* who) {
  if (grid.size() < 2) throw PreconditionError(fmt::format("{}: grid needs at least two points", who));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < t_min) throw PreconditionError(fmt::format("{}: grid point {} below t_min {}", who, grid[i], t_min));
    if (i && !(grid[i] > grid[i - 1])) throw PreconditionError(fmt::format("{}: grid must be strictly increasing", who));
  }
}

}  // namespace

ConvexObjective1D::ConvexObjective1D(std::vector<Knot> knots, LeftExtension left, RightExtension right,
                                     bool has_minimizer, std::string id)
    : knots_(std::move(knots)), left_(left), right_(right), has_minimizer_(has_minimizer), id_(std::move(id)) {
  if (knots_.empty()) throw PreconditionError("ConvexObjective1D: no knots");
  std::sort(knots_.begin(), knots_.end(), [](const Knot& a, const Knot& b) { return a.x < b.x; });
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const Knot& k0 = knots_[i];
    const Knot& k1 = knots_[i + 1];
    const double h = k1.x - k0.x;
    if (!(h > 0.0)) throw PreconditionError(fmt::format("ConvexObjective1D: duplicate knot at x = {}", k0.x));
    const double d0 = k0.slope, d1 = k1.slope;
    const double m = (k1.value - k0.value) / h;
    const double tol = 1e-9 * (std::abs(d0) + std::abs(d1) + std::abs(m)) + 1e-14;
    if (d1 < d0 - tol || m < d0 - tol || m > d1 + tol)
      throw PreconditionError(fmt::format(
          "ConvexObjective1D: knot data not convex on [{}, {}] (slopes {}, {}, secant {})", k0.x, k1.x, d0, d1, m));
    Piece p{k0.x, k1.x, 0.0, k0.value, d0, 0.0, k1.value, d1, 0.0};
    double lam = 0.5;
    double sbar = m;
    if (d1 - d0 > 1e-14 * (std::abs(d0) + std::abs(d1))) {
      const double L = (d0 + d1 - 2.0 * m) / (d1 - d0);
      lam = std::clamp((1.0 + L) / 2.0, 0.0, 1.0);
      sbar = std::clamp(2.0 * m - d1 + lam * (d1 - d0), d0, d1);
    } else {
      // (near) equal slopes: a straight segment with the secant slope
      p.d0 = p.d1 = m;
    }
    p.xi = k0.x + lam * h;
    p.A = lam > 0.0 ? (sbar - p.d0) / (2.0 * lam * h) : 0.0;
    p.B = lam < 1.0 ? (p.d1 - sbar) / (2.0 * (1.0 - lam) * h) : 0.0;
    pieces_.push_back(p);
  }
  if (right_ == RightExtension::exponential_decay && !(knots_.back().value > 0.0 && knots_.back().slope < 0.0))
    right_ = RightExtension::linear;
}

std::size_t ConvexObjective1D::locate(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x, [](double v, const Knot& k) { return v < k.x; });
  return std::size_t(it - knots_.begin()) - 1;  // valid only for x inside [x_first, x_last)
}

double ConvexObjective1D::value(double x) const {
  const Knot& first = knots_.front();
  const Knot& last = knots_.back();
  if (x < first.x) {
    const double d = x - first.x;
    return first.value + first.slope * d + (left_ == LeftExtension::quadratic ? d * d : 0.0);
  }
  if (x >= last.x) {
    const double d = x - last.x;
    if (right_ == RightExtension::exponential_decay) return last.value * std::exp(last.slope * d / last.value);
    return last.value + last.slope * d;
  }
  const Piece& p = pieces_[locate(x)];
  if (x <= p.xi) {
    const double d = x - p.x0;
    return p.f0 + d * (p.d0 + p.A * d);
  }
  const double d = x - p.x1;
  return p.f1 + d * (p.d1 + p.B * d);
}

double ConvexObjective1D::slope(double x) const {
  const Knot& first = knots_.front();
  const Knot& last = knots_.back();
  if (x < first.x) return first.slope + (left_ == LeftExtension::quadratic ? 2.0 * (x - first.x) : 0.0);
  if (x >= last.x) {
    if (right_ == RightExtension::exponential_decay)
      return last.slope * std::exp(last.slope * (x - last.x) / last.value);
    return last.slope;
  }
  const Piece& p = pieces_[locate(x)];
  if (x <= p.xi) return p.d0 + 2.0 * p.A * (x - p.x0);
  return p.d1 + 2.0 * p.B * (x - p.x1);
}

double ConvexObjective1D::curvature_bound() const {
  double c = left_ == LeftExtension::quadratic ? 2.0 : 0.0;
  for (const Piece& p : pieces_) c = std::max({c, 2.0 * std::abs(p.A), 2.0 * std::abs(p.B)});
  if (right_ == RightExtension::exponential_decay) {
    const Knot& k = knots_.back();
    c = std::max(c, k.slope * k.slope / k.value);
  }
  return c;
}

nlohmann::json ConvexObjective1D::to_json() const {
  std::vector<double> x, phi, dphi;
  for (const Knot& k : knots_) {
    x.push_back(k.x);
    phi.push_back(k.value);
    dphi.push_back(k.slope);
  }
  return {{"id", id_},         {"x", x},
          {"phi", phi},        {"dphi", dphi},
          {"X", X()},          {"has_minimizer", has_minimizer_},
          {"left_ext", to_string(left_)}, {"right_ext", to_string(right_)}};
}

ConvexObjective1D ConvexObjective1D::from_json(const nlohmann::json& doc) {
  const auto x = doc.at("x").get<std::vector<double>>();
  const auto phi = doc.at("phi").get<std::vector<double>>();
  const auto dphi = doc.at("dphi").get<std::vector<double>>();
  if (x.size() != phi.size() || x.size() != dphi.size()) throw Error("knot table arrays differ in length");
  std::vector<Knot> k;
  for (std::size_t i = 0; i < x.size(); ++i) k.push_back({x[i], phi[i], dphi[i]});
  const auto l = doc.value("left_ext", std::string("quadratic"));
  const auto r = doc.value("right_ext", std::string("linear"));
  return ConvexObjective1D(std::move(k), l == "linear" ? LeftExtension::linear : LeftExtension::quadratic,
                           r == "exponential_decay" ? RightExtension::exponential_decay : RightExtension::linear,
                           doc.value("has_minimizer", true), doc.value("id", std::string("convex1d")));
}

void ConvexObjective1D::write_knots_csv(const std::filesystem::path& path) const {
  CsvWriter w(path, {"x", "phi", "dphi"});
  for (const Knot& k : knots_) w.row({k.x, k.value, k.slope});
}

BuiltObjective build_objective(const DecayCurve& curve, const std::vector<double>& grid, const BuildOptions& opt) {
  const CurveFlags& f = curve.flags();
  std::vector<std::string> missing;
  if (!holds(f.monotone_decreasing)) missing.push_back("monotone_decreasing");
  if (!holds(f.convex)) missing.push_back("convex");
  if (!holds(f.limit_zero)) missing.push_back("limit_zero");
  if (!holds(f.sqrt_deriv_integrable)) missing.push_back("sqrt_deriv_integrable");
  if (!missing.empty())
    throw PreconditionError(fmt::format("build_objective: curve '{}' lacks flags: {}", curve.name(),
                                        fmt::join(missing, ", ")));
  require_grid(grid, curve.t_min(), "build_objective");

  const std::size_t n = grid.size();
  std::vector<double> psi(n);
  BuiltObjective out{ConvexObjective1D({{0.0, 0.0, 0.0}}, LeftExtension::quadratic, RightExtension::linear, true),
                     {}, 0.0, curve.has_sqrt_deriv_tail()};
  auto root = [&](double t) { return std::sqrt(std::max(-curve.deriv(t), 0.0)); };
  if (out.closed_form_tail) {
    for (std::size_t j = 0; j < n; ++j) psi[j] = *curve.sqrt_deriv_tail(grid[j]);
  } else {
    try {
      const QuadResult tail = integrate_to_infinity(root, grid.back(), 1e-10);
      psi[n - 1] = tail.value;
      out.tail_error = tail.error;
    } catch (const NumericalError& e) {
      throw PreconditionError(std::string("build_objective: sqrt(-g') does not look integrable: ") + e.what());
    }
    for (std::size_t j = n - 1; j-- > 0;) {
      const QuadResult seg = integrate(root, grid[j], grid[j + 1], curve.breakpoints(), opt.quad_rtol);
      psi[j] = psi[j + 1] + seg.value;
      out.tail_error += seg.error;
    }
  }

  std::vector<Knot> knots;
  knots.reserve(n + 1);
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double s = root(grid[j]);
    if (s > prev_slope * (1.0 + opt.convexity_rel_tol) + 1e-300)
      throw PreconditionError(fmt::format("build_objective: -g' increases near t = {} (curve not convex)", grid[j]));
    prev_slope = s;
    knots.push_back({psi[j], curve(grid[j]), s});
  }
  // drop knots that collapsed onto x = 0 (curve already at zero), keep the origin once
  const double xscale = std::max(psi.front(), 1e-300);
  std::vector<Knot> kept;
  for (const Knot& k : knots) {
    if (k.x <= 1e-15 * xscale) continue;
    if (!kept.empty() && kept.back().x - k.x <= 1e-15 * xscale) continue;
    kept.push_back(k);
  }
  if (!kept.empty() && std::abs(kept.back().x) > 0.0 && kept.back().value < 0.0)
    throw PreconditionError("build_objective: negative energy at the last grid point");
  kept.push_back({0.0, 0.0, 0.0});

  ConvexObjective1D obj(std::move(kept), LeftExtension::quadratic, RightExtension::linear, true,
                        "reparam(" + curve.name() + ")");
  if (std::abs(obj.value(0.0)) > opt.phi_zero_tol) throw NumericalError("build_objective: phi(0) != 0");
  out.objective = std::move(obj);
  out.psi = std::move(psi);
  return out;
}

DecayCurve build_no_minimizer_envelope(const DecayCurve& curve) {
  if (!holds(curve.flags().monotone_decreasing))
    throw PreconditionError("envelope: curve must be monotone non-increasing");
  if (!holds(curve.flags().limit_zero)) throw PreconditionError("envelope: curve must tend to zero");
  if (!curve.breakpoints().empty() && !holds(curve.flags().convex))
    throw PreconditionError("envelope: curve is not differentiable; run preprocess_monotone_smooth first");

  const std::vector<double> bps = curve.breakpoints();
  auto phi = [curve, bps](double t) {
    if (t <= 0.0) return curve(std::max(t, curve.t_min()));
    std::vector<double> ub;
    for (double b : bps)
      if (b > t) ub.push_back(t / b);
    return integrate([&](double u) { return u <= 0.0 ? 0.0 : curve(t / u); }, 0.0, 1.0, ub, 1e-12).value;
  };
  CurveFns fns;
  fns.eval = phi;
  // phi' = (phi - g)/t, and phi'' = -g'/t >= 0
  fns.deriv = [phi, curve](double t) {
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::min((phi(t) - curve(t)) / t, 0.0);
  };
  CurveFlags fl;
  fl.monotone_decreasing = FlagState::asserted;
  fl.convex = FlagState::asserted;
  fl.limit_zero = FlagState::asserted;
  nlohmann::json desc = nullptr;
  if (!curve.description().is_null()) desc = {{"family", "envelope"}, {"of", curve.description()}};
  return DecayCurve("envelope(" + curve.name() + ")", std::move(fns), curve.t_min(), fl, desc);
}

DecayCurve preprocess_monotone_smooth(const std::function<double(double)>& raw, const PreprocessOptions& opt) {
  if (!(opt.horizon > opt.r0 + 2.0)) throw PreconditionError("preprocess: horizon must exceed r0 + 2");
  if (!(opt.resolution > 0.0)) throw PreconditionError("preprocess: resolution must be positive");
  const double d = opt.resolution;
  const auto K = std::size_t(std::ceil((opt.horizon - opt.r0) / d));
  const double H = opt.r0 + double(K) * d;
  std::vector<double> M(K + 1);
  for (std::size_t k = 0; k <= K; ++k) M[k] = std::max(raw(opt.r0 + double(k) * d), 0.0);
  const double global_sup = *std::max_element(M.begin(), M.end());
  double tail_sup = 0.0;
  for (std::size_t k = 0; k <= K; ++k)
    if (opt.r0 + double(k) * d >= opt.r0 + (H - opt.r0) / 2.0) tail_sup = std::max(tail_sup, M[k]);
  if (global_sup > 0.0 && tail_sup > opt.tail_tol * global_sup)
    throw PreconditionError(fmt::format("preprocess: raw does not tend to 0 over the horizon (tail sup {:.3g}, sup {:.3g})",
                                        tail_sup, global_sup));
  for (std::size_t k = K; k-- > 0;) M[k] = std::max(M[k], M[k + 1]);
  // cumulative integral of the piecewise-linear running max
  std::vector<double> C(K + 1, 0.0);
  for (std::size_t k = 1; k <= K; ++k) C[k] = C[k - 1] + 0.5 * d * (M[k - 1] + M[k]);
  const double r0 = opt.r0;
  const double MK = M[K];

  auto gtilde = [M, r0, d, K, H, MK](double t) {
    if (t <= r0) return M[0];
    if (t >= H) return MK * (H / t) * (H / t);
    const double u = (t - r0) / d;
    const auto k = std::min(std::size_t(u), K - 1);
    const double w = u - double(k);
    return (1.0 - w) * M[k] + w * M[k + 1];
  };
  auto cumulative = [M, C, r0, d, K, H, MK](double t) {
    if (t <= r0) return (t - r0) * M[0];
    if (t >= H) return C[K] + MK * H * H * (1.0 / H - 1.0 / t);
    const double u = (t - r0) / d;
    const auto k = std::min(std::size_t(u), K - 1);
    const double s = (u - double(k)) * d;
    const double slope = (M[k + 1] - M[k]) / d;
    return C[k] + s * M[k] + 0.5 * slope * s * s;
  };
  CurveFns fns;
  fns.eval = [cumulative](double t) { return std::max(cumulative(t) - cumulative(t - 1.0), 0.0); };
  fns.deriv = [gtilde](double t) { return std::min(gtilde(t) - gtilde(t - 1.0), 0.0); };
  CurveFlags fl;
  fl.monotone_decreasing = FlagState::asserted;
  fl.limit_zero = FlagState::asserted;
  return DecayCurve("preprocessed", std::move(fns), r0 + 1.0, fl);
}

ConvexObjective1D build_no_minimizer_objective(const DecayCurve& curve, const std::vector<double>& grid,
                                               NoMinimizerVariant variant) {
  if (!holds(curve.flags().monotone_decreasing) || !holds(curve.flags().convex))
    throw PreconditionError("no-minimizer objective: curve must be convex and decreasing (use the envelope)");
  require_grid(grid, curve.t_min(), "no-minimizer objective");
  const std::size_t n = grid.size();
  std::vector<double> g(n), dg(n);
  for (std::size_t j = 0; j < n; ++j) {
    g[j] = curve(grid[j]);
    dg[j] = curve.deriv(grid[j]);
    if (!(g[j] > 0.0)) throw PreconditionError("no-minimizer objective: curve must stay positive on the grid");
    if (!std::isfinite(dg[j])) throw PreconditionError("no-minimizer objective: derivative not finite on the grid");
  }
  if (!(g.back() < g.front())) throw PreconditionError("no-minimizer objective: flat curve gives a degenerate objective");

  std::vector<Knot> knots(n);
  if (variant == NoMinimizerVariant::heavy_ball) {
    const double c = 2.0 * std::sqrt(g.front());
    for (std::size_t j = 0; j < n; ++j) knots[j] = {c * (grid[j] - grid.front()), g[j], dg[j] / c};
    return ConvexObjective1D(std::move(knots), LeftExtension::linear, RightExtension::exponential_decay, false,
                             "no_minimizer_hb(" + curve.name() + ")");
  }
  auto root = [&](double t) { return std::sqrt(std::max(-curve.deriv(t), 0.0)); };
  double x = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j) {
      const double seg = integrate(root, grid[j - 1], grid[j], curve.breakpoints(), 1e-12).value;
      if (!(seg > 0.0))
        throw PreconditionError(fmt::format("no-minimizer objective: curve is flat on [{}, {}]", grid[j - 1], grid[j]));
      x += seg;
    }
    knots[j] = {x, g[j], -std::sqrt(std::max(-dg[j], 0.0))};
  }
  return ConvexObjective1D(std::move(knots), LeftExtension::linear, RightExtension::exponential_decay, false,
                           "no_minimizer_gf(" + curve.name() + ")");
}

}  // namespace decaylab
