#pragma once

#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/parallel.hpp"

namespace decaylab {

enum class FlagState { unknown, asserted, verified };

struct CurveFlags {
  FlagState monotone_decreasing = FlagState::unknown;
  FlagState convex = FlagState::unknown;
  FlagState limit_zero = FlagState::unknown;
  FlagState sqrt_deriv_integrable = FlagState::unknown;
};

inline bool holds(FlagState s) { return s != FlagState::unknown; }
std::string to_string(FlagState s);

// Everything a curve family provides. Only eval/deriv are mandatory.
struct CurveFns {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  // t -> int_t^inf g
  std::function<double(double)> tail_integral;
  // t -> int_t^inf sqrt(-g')
  std::function<double(double)> sqrt_deriv_tail;
  // points where g or g' is not smooth
  std::vector<double> breakpoints;
};

// Immutable target decay curve t -> g(t) on [t_min, inf).
class DecayCurve {
 public:
  DecayCurve(std::string name, CurveFns fns, double t_min, CurveFlags flags,
             nlohmann::json description = nullptr);

  double operator()(double t) const { return impl_->fns.eval(t); }
  double eval(double t) const { return impl_->fns.eval(t); }
  // At a jump or kink this is the right limit.
  double deriv(double t) const { return impl_->fns.deriv(t); }
  double t_min() const { return impl_->t_min; }
  const CurveFlags& flags() const { return impl_->flags; }
  const std::string& name() const { return impl_->name; }
  const std::vector<double>& breakpoints() const { return impl_->fns.breakpoints; }

  std::optional<double> tail_integral(double t) const;
  std::optional<double> sqrt_deriv_tail(double t) const;
  bool has_tail_integral() const { return bool(impl_->fns.tail_integral); }
  bool has_sqrt_deriv_tail() const { return bool(impl_->fns.sqrt_deriv_tail); }

  DecayCurve with_flags(CurveFlags flags) const;
  DecayCurve renamed(std::string name) const;

  // null for curves built from arbitrary callables
  const nlohmann::json& description() const { return impl_->description; }
  nlohmann::json to_json() const;

 private:
  struct Impl {
    std::string name;
    CurveFns fns;
    double t_min;
    CurveFlags flags;
    nlohmann::json description;
  };
  std::shared_ptr<const Impl> impl_;
};

enum class CurveFamily { exponential, inverse_power, inverse_square, power_log, linear_cutoff, constant };

CurveFamily parse_family(const std::string& s);
std::string to_string(CurveFamily f);

// params by family:
//   exponential:   amplitude (1), rate (1)           g = A e^{-rate t}
//   inverse_power: power p, shift c (1), t_min (0)   g = (c+t)^{-p}
//   inverse_square: none                             g = (1+t)^{-2}
//   power_log:     alpha                             g = 1/(t (log t)^alpha), t >= 2
//   linear_cutoff: rate r (1)                        g = max(1 - r t, 0)
//   constant:      value (0)
DecayCurve make_named_curve(CurveFamily family, const std::map<std::string, double>& params = {});
DecayCurve make_named_curve(const std::string& family, const std::map<std::string, double>& params = {});

// Monotone increasing rate function phi with phi -> inf (the comparison
// function of the staircase examples, not an objective).
struct RateFunction {
  std::string family;  // "identity" | "power" | "log1p"
  std::map<std::string, double> params;
  std::function<double(double)> fn;

  static RateFunction named(const std::string& family, const std::map<std::string, double>& params = {});
  double operator()(double t) const { return fn(t); }
};

enum class StaircaseVariant { sqrt_steps, cbrt_steps };

struct StaircaseSpec {
  RateFunction phi;
  std::vector<double> radii;  // strictly increasing, R_1 < R_2 < ...
  StaircaseVariant variant = StaircaseVariant::sqrt_steps;
};

std::vector<double> geometric_radii(double base, std::size_t count);

// Ratio-test estimate of whether the weight series converges at truncation N.
struct SeriesCheck {
  bool converges = true;
  double partial_sum = 0.0;
  double last_ratio = 0.0;
  double tail_estimate = 0.0;
};
SeriesCheck check_staircase_series(const StaircaseSpec& spec, std::size_t N);

// sqrt_steps: g = sum_{n<=N} 1/(R_n sqrt(phi(R_n))) 1_{(0,R_n]}
// cbrt_steps: sqrt(-g') = sum_{n<=N} 1/(R_n cbrt(phi(R_n))) 1_{(0,2R_n]}, g(t) = int_t^inf (-g')
DecayCurve make_staircase(const StaircaseSpec& spec, std::size_t N);

// Partial-sum formulas quoted by the staircase examples (independent of the
// curve evaluation code).
double staircase_integral_formula(const StaircaseSpec& spec, std::size_t N);
double staircase_sqrt_deriv_formula(const StaircaseSpec& spec, std::size_t N);

DecayCurve curve_from_json(const nlohmann::json& doc);

struct FlagCheckOptions {
  double rel_tol_analytic = 1e-8;
  double rel_tol_fd = 1e-4;
};

struct FlagCheckResult {
  DecayCurve curve;  // flags upgraded to `verified` where the grid check passed
  bool nonnegative = true;
  bool monotone = true;
  bool convex = true;
  bool fd_consistent = true;
  double worst_fd_residual = 0.0;
  std::vector<std::string> messages;
};

// Grid checks of the curve invariants. Flags that were asserted but fail are
// reported in `messages` and downgraded to unknown.
FlagCheckResult verify_flags(const DecayCurve& curve, const std::vector<double>& grid,
                             const FlagCheckOptions& opt = {});

struct SqrtDerivIntegral {
  double value = 0.0;        // sum_i sqrt(h a_i): upper Riemann-type estimate on [t_min, T]
  double lower = 0.0;        // value - error_bound
  double error_bound = 0.0;  // h (sqrt(-g'(t_min)) - sqrt(-g'(T))) for convex curves, inf otherwise
  std::optional<double> tail;  // int_T^inf sqrt(-g') when a closed form exists
  std::size_t cells = 0;
};

// Riemann estimate of int_{t_min}^T sqrt(-g') on `cells` uniform cells, using
// exact cell increments a_i = g(t_{i-1}) - g(t_i). Throws PreconditionError on
// a negative increment (curve not monotone).
SqrtDerivIntegral sqrt_deriv_integral(const DecayCurve& curve, double T, std::size_t cells,
                                      Exec exec = Exec::parallel);

// Uniform grid helpers used across modules.
std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

}  // namespace decaylab
