#include "decaylab/flows.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "decaylab/error.hpp"
#include "decaylab/rng.hpp"

namespace decaylab {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

TrajectoryMeta base_meta(const Objective& obj, std::string kind) {
  TrajectoryMeta m;
  m.kind = std::move(kind);
  m.objective_id = obj.id();
  m.xstar = obj.minimizer();
  m.fstar = obj.infimum();
  return m;
}

void check_dim(const Objective& obj, std::size_t n) {
  if (obj.dim() != n) throw PreconditionError(fmt::format("initial state has dimension {}, objective {}", n, obj.dim()));
}

}  // namespace

Trajectory integrate_gradient_flow(const Objective& obj, std::vector<double> x0, double t_end,
                                   const GradientFlowOptions& opt) {
  check_dim(obj, x0.size());
  if (!(t_end > 0.0)) throw PreconditionError("gradient flow: need t_end > 0");
  TrajectoryMeta meta = base_meta(obj, "gradient_flow");
  meta.params = {{"rtol", opt.rtol}, {"atol", opt.atol}, {"t_end", t_end}};
  Trajectory tr(x0.size(), false, meta);
  const auto samples = opt.schedule.times_after(0.0, t_end);
  tr.reserve(samples.size() + 1);
  std::vector<double> g(x0.size());
  auto rhs = [&obj](double, std::span<const double> y, std::span<double> dy) {
    obj.gradient(y, dy);
    for (double& c : dy) c = -c;
  };
  auto observe = [&](double t, std::span<const double> y) {
    obj.gradient(y, g);
    tr.push(t, y, obj.value(y), norm2(g));
  };
  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  integrate_dopri5(rhs, 0.0, std::move(x0), samples, observe, o);
  return tr;
}

Trajectory run_gd(const Objective& obj, std::vector<double> x, double eta, std::size_t N, const GdOptions& opt) {
  check_dim(obj, x.size());
  if (!(eta > 0.0)) throw PreconditionError("gd: need eta > 0");
  if (opt.L && !(eta < 2.0 / *opt.L))
    throw PreconditionError(fmt::format("gd: step size {} violates eta < 2/L = {}", eta, 2.0 / *opt.L));
  TrajectoryMeta meta = base_meta(obj, "gd");
  meta.params = {{"eta", eta}, {"N", double(N)}};
  if (opt.L) meta.params["L"] = *opt.L;
  Trajectory tr(x.size(), false, meta);
  tr.reserve(N + 1);
  std::vector<double> g(x.size());
  double f = obj.value(x);
  for (std::size_t n = 0;; ++n) {
    obj.gradient(x, g);
    tr.push(double(n), x, f, norm2(g));
    if (n == N) break;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] - eta * g[i];
    const double fn = obj.value(x);
    if (!std::isfinite(fn) || fn > f + opt.divergence_tol * std::max(1.0, std::abs(f)))
      throw DivergenceError(fmt::format("gd: objective increased at step {} ({} -> {}); step size too large", n + 1, f, fn),
                            long(n + 1));
    f = fn;
  }
  return tr;
}

std::vector<Trajectory> run_sgd(const Objective& obj, const std::vector<double>& x0, double eta, double sigma,
                                std::size_t N, const SgdOptions& opt) {
  check_dim(obj, x0.size());
  if (!(eta > 0.0) || !(sigma >= 0.0)) throw PreconditionError("sgd: need eta > 0, sigma >= 0");
  if (opt.L) {
    const double cap = 1.0 / (*opt.L * (1.0 + sigma * sigma));
    if (eta > cap * (1.0 + 1e-15))
      throw PreconditionError(fmt::format("sgd: step size {} exceeds 1/(L(1+sigma^2)) = {}", eta, cap));
  }
  if (opt.replicas == 0) throw PreconditionError("sgd: need at least one replica");
  std::vector<Trajectory> out(opt.replicas);
  parallel_for(opt.replicas, opt.exec, [&](std::size_t r) {
    TrajectoryMeta meta = base_meta(obj, "sgd");
    meta.params = {{"eta", eta}, {"sigma", sigma}, {"N", double(N)}, {"replica", double(r)},
                   {"noise", opt.noise == NoiseModel::rademacher ? 0.0 : 1.0}};
    if (opt.L) meta.params["L"] = *opt.L;
    meta.seed = opt.seed;
    Trajectory tr(x0.size(), false, meta);
    tr.reserve(N + 1);
    CounterRng rng(opt.seed, r);
    std::vector<double> x = x0, g(x0.size());
    for (std::size_t n = 0;; ++n) {
      obj.gradient(x, g);
      tr.push(double(n), x, obj.value(x), norm2(g));
      if (n == N) break;
      const double zeta = opt.noise == NoiseModel::rademacher ? rng.rademacher() : rng.gaussian();
      const double scale = 1.0 + sigma * zeta;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] - eta * (scale * g[i]);
    }
    out[r] = std::move(tr);
  });
  return out;
}

Trajectory run_heavy_ball_scheme(const Objective& obj, std::vector<double> x0, double alpha, double h, std::size_t N,
                                 const HeavyBallSchemeOptions& opt) {
  check_dim(obj, x0.size());
  if (!(h > 0.0)) throw PreconditionError("heavy-ball scheme: need h > 0");
  if (!(alpha > 0.0)) throw PreconditionError("heavy-ball scheme: need alpha > 0");
  const std::size_t d = x0.size();
  const double sh = std::sqrt(h);
  TrajectoryMeta meta = base_meta(obj, "heavy_ball_scheme");
  meta.params = {{"alpha", alpha}, {"h", h}, {"N", double(N)}};
  if (alpha < 3.0) meta.params["alpha_below_3"] = 1.0;
  Trajectory tr(d, true, meta);
  tr.reserve(N + 1);
  std::vector<double> x = x0, y = x0, xn(d), g(d), gx(d), v(d);
  for (std::size_t n = 0; n <= N; ++n) {
    obj.gradient(y, g);
    for (std::size_t i = 0; i < d; ++i) xn[i] = y[i] - h * g[i];
    const double mom = double(n) / (double(n) + alpha);
    for (std::size_t i = 0; i < d; ++i) {
      y[i] = xn[i] + mom * (xn[i] - x[i]);
      v[i] = (xn[i] - x[i]) / sh;
    }
    obj.gradient(x, gx);
    const double f = obj.value(x);
    if (!std::isfinite(f) || norm2(x) > opt.blowup)
      throw DivergenceError(fmt::format("heavy-ball scheme diverged at step {}", n), long(n));
    tr.push(double(n) * sh, x, v, f, norm2(gx));
    x.swap(xn);
  }
  return tr;
}

Trajectory integrate_heavy_ball_ode(const Objective& obj, std::vector<double> x0, Friction friction, double t_end,
                                    const HeavyBallOdeOptions& opt) {
  check_dim(obj, x0.size());
  if (!(friction.coeff >= 0.0)) throw PreconditionError("heavy-ball ode: friction must be non-negative");
  const bool nesterov = friction.kind == Friction::Kind::nesterov;
  double t_start = 0.0;
  if (opt.t_start) {
    t_start = *opt.t_start;
  } else if (nesterov) {
    t_start = opt.mu ? std::max(opt.h, 1e-3) * friction.coeff / (2.0 * std::sqrt(*opt.mu)) : 1e-3;
  }
  if (nesterov && !(t_start > 0.0)) throw PreconditionError("heavy-ball ode: alpha/t friction needs t_start > 0");
  if (!(t_end > t_start)) throw PreconditionError("heavy-ball ode: need t_end > t_start");
  const std::size_t d = x0.size();
  TrajectoryMeta meta = base_meta(obj, "heavy_ball_ode");
  meta.params = {{"t_start", t_start}, {"rtol", opt.rtol}, {"t_end", t_end}};
  meta.params[nesterov ? "alpha" : "beta"] = friction.coeff;
  Trajectory tr(d, true, meta);
  const double c = friction.coeff;
  auto rhs = [&obj, d, c, nesterov](double t, std::span<const double> y, std::span<double> dy) {
    obj.gradient(y.subspan(0, d), dy.subspan(d, d));
    const double k = nesterov ? c / t : c;
    for (std::size_t i = 0; i < d; ++i) {
      dy[i] = y[d + i];
      dy[d + i] = -k * y[d + i] - dy[d + i];
    }
  };
  std::vector<double> g(d);
  auto observe = [&](double t, std::span<const double> y) {
    obj.gradient(y.subspan(0, d), g);
    tr.push(t, y.subspan(0, d), y.subspan(d, d), obj.value(y.subspan(0, d)), norm2(g));
  };
  std::vector<double> y0(2 * d, 0.0);
  std::copy(x0.begin(), x0.end(), y0.begin());
  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  integrate_dopri5(rhs, t_start, std::move(y0), opt.schedule.times_after(t_start, t_end), observe, o);
  return tr;
}

OscillatorSpec::OscillatorSpec(double mu_, double alpha_, double x0_) : mu(mu_), alpha(alpha_), x0(x0_) {
  if (!(mu > 0.0) || !(alpha > 0.0)) throw PreconditionError("oscillator: need mu > 0 and alpha > 0");
}

double OscillatorSpec::t_transition() const { return alpha / (2.0 * std::sqrt(mu)); }
double OscillatorSpec::asymptotic_frequency() const { return std::sqrt(mu); }

OscillatorState classical_oscillator_solution(double beta, double mu, double x0, double t) {
  if (!(beta >= 0.0) || !(mu > 0.0)) throw PreconditionError("oscillator: need beta >= 0 and mu > 0");
  const double half = beta / 2.0;
  const double disc = half * half - mu;
  if (std::abs(disc) <= 1e-12 * mu) {
    const double k = std::sqrt(mu);
    const double e = std::exp(-k * t);
    return {x0 * (1.0 + k * t) * e, -x0 * k * k * t * e};
  }
  if (disc < 0.0) {
    const double w = std::sqrt(-disc);
    const double c1 = x0, c2 = half * x0 / w;
    const double e = std::exp(-half * t);
    const double cs = std::cos(w * t), sn = std::sin(w * t);
    const double x = e * (c1 * cs + c2 * sn);
    const double v = e * (-half * (c1 * cs + c2 * sn) + w * (-c1 * sn + c2 * cs));
    return {x, v};
  }
  const double r = std::sqrt(disc);
  const double lp = -half + r, lm = -half - r;
  const double A = -lm * x0 / (lp - lm), B = lp * x0 / (lp - lm);
  const double ep = std::exp(lp * t), em = std::exp(lm * t);
  return {A * ep + B * em, lp * A * ep + lm * B * em};
}

std::string to_string(NoiseModel m) { return m == NoiseModel::rademacher ? "rademacher" : "gaussian"; }

NoiseModel parse_noise_model(const std::string& s) {
  if (s == "rademacher") return NoiseModel::rademacher;
  if (s == "gaussian") return NoiseModel::gaussian;
  throw PreconditionError("unknown noise model '" + s + "'");
}

}  // namespace decaylab
