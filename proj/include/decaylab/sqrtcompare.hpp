#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/curves.hpp"
#include "decaylab/parallel.hpp"

namespace decaylab {

// a_i = g(t_{i-1}) - g(t_i) on the uniform grid t_i = t_min + i h of
// [t_min, T] (i = 1..N), plus the lumped tail a_{N+1} = g(T).
struct Increments {
  std::vector<double> a;  // N + 1 entries
  double t0 = 0.0;
  double T = 0.0;
  double h = 0.0;
  // a_N >= a_{N+1}: the lumped tail keeps the sequence ordered. Convexity
  // only orders the N cell increments.
  bool tail_ordered = true;
};

// Throws PreconditionError if the curve lacks the convex/decreasing flags or a
// cell increment is negative or larger than its predecessor.
Increments discretize_increments(const DecayCurve& curve, double T, std::size_t N);

enum class Certificate { majorization, direct };
std::string to_string(Certificate c);

struct SqrtComparison {
  Increments a;  // from g
  Increments b;  // from G
  bool tail_dominance = false;  // exact, on differences of the rounded grid values
  Certificate certificate = Certificate::direct;
  std::size_t map_entries = 0;
  double sum_sqrt_a = 0.0;
  double sum_sqrt_b = 0.0;
  bool holds = false;  // sum sqrt b >= sum sqrt a (up to rounding slack)
  // Riemann estimates sum_{i<=N} sqrt(h a_i) of int_{t0}^T sqrt(-g') and the
  // discretization error bound h (sqrt(-g'(t0)) - sqrt(-g'(T)))
  double riemann_g = 0.0, riemann_G = 0.0;
  double riemann_error_g = 0.0, riemann_error_G = 0.0;

  nlohmann::json summary_json() const;
  // i, a_i, b_i, sqrt(a_i), sqrt(b_i)
  void write_csv(const std::filesystem::path& path) const;
};

struct CompareOptions {
  std::size_t majorize_cap = 12;  // N + 1 at most this uses the averaging-map certificate
  std::function<double(double)> concave;  // defaults to sqrt
};

// Throws PreconditionError (naming the grid point) if G < g somewhere on the grid.
SqrtComparison compare_sqrt_integrals(const DecayCurve& g, const DecayCurve& G, double T, std::size_t N,
                                      const CompareOptions& opt = {});

enum class FuzzMode {
  bump,  // G = g + (random convex decreasing curve)
  max,   // G = max(g, random convex decreasing curve)
};

struct FuzzOptions {
  std::size_t trials = 10000;
  std::size_t max_N = 64;
  std::uint64_t seed = 1;
  FuzzMode mode = FuzzMode::bump;
  Exec exec = Exec::parallel;
  std::function<double(double)> concave;  // defaults to sqrt
  std::size_t max_reproducers = 5;
};

struct FuzzReproducer {
  std::size_t trial = 0;
  std::size_t N = 0;
  double T = 0.0;
  nlohmann::json g, G;
  double sum_sqrt_a = 0.0, sum_sqrt_b = 0.0;
};

struct FuzzReport {
  std::size_t trials = 0;
  std::size_t ordered_trials = 0;       // both increment sequences fully ordered
  std::size_t violations = 0;           // failures among ordered trials
  std::size_t tail_order_failures = 0;  // failures with an out-of-order lumped tail
  std::size_t majorization_certified = 0;
  std::vector<FuzzReproducer> reproducers;  // shrunk (N halved while failing)

  nlohmann::json to_json() const;
};

FuzzReport fuzz_counterexample_search(const FuzzOptions& opt = {});

// Random convex, decreasing curve with limit 0 on [0, inf): a positive
// combination of exponentials, shifted inverse powers and linear cutoffs.
DecayCurve random_convex_curve(std::uint64_t seed, std::uint64_t stream);
DecayCurve sum_curve(const DecayCurve& f, const DecayCurve& g);
DecayCurve max_curve(const DecayCurve& f, const DecayCurve& g);

struct BarrierResult {
  double alpha = 0.0;
  double estimate_lo = 0.0;  // sqrt-integral estimate on [2, T_lo]
  double estimate_hi = 0.0;  // on [2, T_hi]
  double growth = 0.0;
  double integral_hi = 0.0;  // int_2^{T_hi} g_alpha, by quadrature
  double integral_closed_form = 0.0;  // (log 2)^{1-alpha} / (alpha - 1)
};

// g_alpha(t) = 1/(t (log t)^alpha): integrable, but its sqrt-derivative
// integral grows like (log T)^{1-alpha/2}.
BarrierResult barrier_experiment(double alpha, double T_lo, double T_hi, double h = 0.25,
                                 Exec exec = Exec::parallel);

}  // namespace decaylab
