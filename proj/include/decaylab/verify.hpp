#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/trajectory.hpp"

namespace decaylab {

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct ReportPoint {
  double t, lhs, rhs;
};

// Bound check "lhs <= rhs + tolerance" along a series. Children carry the
// secondary claims that come with a bound (consequences, tail products).
struct DecayReport {
  std::string name;
  std::vector<ReportPoint> series;
  Verdict verdict = Verdict::pass;
  double worst_margin = 0.0;  // min over the series of rhs - lhs
  double tolerance = 0.0;
  std::string note;
  std::map<std::string, double> values;
  std::vector<DecayReport> children;

  // verdict = pass iff every lhs <= rhs + tol
  void settle();
  // fail if any child fails, else inconclusive if any is inconclusive
  Verdict overall() const;
  const DecayReport* child(const std::string& name) const;

  nlohmann::json summary_json() const;
  void write_csv(const std::filesystem::path& path) const;
};

DecayReport make_report(std::string name, std::vector<ReportPoint> series, double tol);

// L(t) = t (f(x_t) - f*) + |x_t - x*|^2 / 2 non-increasing. Default tolerance:
// 10 * rtol(meta) * max(L(0), 1).
DecayReport lyapunov_gf(const Trajectory& tr, std::optional<double> tol = std::nullopt);

enum class ExcessWeight { one, t };
// Cumulative trapezoid of weight * excess against |x0 - x*|^2/2 (weight one)
// or (alpha-1)^2 |x0 - x*|^2 / (2(alpha-3)) (weight t, heavy ball, alpha > 3).
DecayReport excess_integral(const Trajectory& tr, ExcessWeight weight, std::optional<double> alpha = std::nullopt);

enum class ProductWeight { t, t_log_t, t_log2_t, t2 };
enum class LimitMode { lim, liminf };

struct ProductOptions {
  double threshold = 1e-2;
  LimitMode mode = LimitMode::lim;
  double min_horizon = 10.0;  // shorter runs are inconclusive
  double tail_start_fraction = 0.1;  // tail window is [fraction * t_end, t_end]
};

// weight(t) * excess over the tail window. lim claims pass iff the tail sup is
// below the threshold; liminf claims pass iff some tail sample is, and are
// never failed, only inconclusive.
DecayReport decay_products(const Trajectory& tr, ProductWeight weight, const ProductOptions& opt = {});

// min_{t <= s <= t log t} s (f(x_s) - f*) <= |x0 - x*|^2 / (2 log log t)
DecayReport best_iterate_bound(const Trajectory& tr, double t);

// Trapezoid of the speed (velocity if recorded, else gradient norm; discrete
// runs use the polyline length).
double path_length(const Trajectory& tr);
double polyline_length(const Trajectory& tr);
// excess(t) <= length^2 / (4 t) with length = path length + |x_end - x*|
DecayReport length_bound(const Trajectory& tr);

struct SelfContractOptions {
  double tol = 0.0;
  std::size_t max_points = 4000;  // thin the trajectory evenly above this
};
// |x(t2) - x(t3)| <= |x(t1) - x(t3)| for all t1 < t2 < t3 sampled.
DecayReport self_contracting_check(const Trajectory& tr, const SelfContractOptions& opt = {});

struct GdSumOptions {
  double tail_threshold = 1e-6;    // n * excess in the last decade
  double liminf_threshold = 1e-6;  // running inf of n log n * excess
  double tail_start_fraction = 0.5;
};
// eta sum (f(x_n) - f*) <= |x0 - x*|^2/2 + eta/(2(1 - L eta/2)) (f(x0) - f*)
DecayReport gd_sum_bound(const Trajectory& tr, double eta, double L, const GdSumOptions& opt = {});

struct SgdBoundOptions {
  double eps = 1e-3;
  double delta = 0.01;
  double tail_fraction = 0.1;  // tail = last fraction of iterations
};
// Monte Carlo mean of sum_n (f(X_n) - f*) against
// L(1+s^2)/2 E|X0 - x*|^2 + 2(1+s^2) E[f(X0) - f*], with 3 standard errors of slack.
DecayReport sgd_bounds(const std::vector<Trajectory>& replicas, double eta, double L, double sigma,
                       const SgdBoundOptions& opt = {});

// L(t) = t^2 (f - f*) + |(alpha-1)(x - x*) + t v|^2 / 2 non-increasing (alpha >= 3).
DecayReport hb_lyapunov(const Trajectory& tr, std::optional<double> alpha = std::nullopt, double tol = 1e-6);

struct SpeedBoundOptions {
  double tol = 1e-9;
  // 1D decreasing objective: f(x(t)) >= f(x0 + sqrt(2 f(x0)) t) on [t_lo, t_hi]
  std::function<double(double)> f1d;
  double t_lo = 1.0;
  double t_hi = 100.0;
};
DecayReport hb_speed_bound(const Trajectory& tr, const SpeedBoundOptions& opt = {});

}  // namespace decaylab
