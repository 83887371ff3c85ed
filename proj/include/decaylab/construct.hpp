#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <vector>

#include "decaylab/curves.hpp"

namespace decaylab {

struct Knot {
  double x;
  double value;
  double slope;
};

enum class LeftExtension { quadratic, linear };
enum class RightExtension { linear, exponential_decay };

// Convex C^1 function of one variable, given by knots (x, phi, phi') and a
// shape-preserving quadratic spline between them (one interior breakpoint per
// interval, Schumaker's construction). Outside [x_first, x_last] one of the
// documented extensions applies.
class ConvexObjective1D {
 public:
  ConvexObjective1D(std::vector<Knot> knots, LeftExtension left, RightExtension right, bool has_minimizer,
                    std::string id = "convex1d");

  double value(double x) const;
  double slope(double x) const;

  const std::vector<Knot>& knots() const { return knots_; }
  // right end of the constructed region
  double X() const { return knots_.back().x; }
  bool has_minimizer() const { return has_minimizer_; }
  LeftExtension left_extension() const { return left_; }
  RightExtension right_extension() const { return right_; }
  const std::string& id() const { return id_; }
  // max |phi''| over the spline pieces (a local Lipschitz bound for phi')
  double curvature_bound() const;

  nlohmann::json to_json() const;
  static ConvexObjective1D from_json(const nlohmann::json& doc);
  void write_knots_csv(const std::filesystem::path& path) const;

 private:
  struct Piece {
    double x0, x1, xi;  // xi: interior breakpoint
    double f0, d0, A;   // left quadratic  f0 + d0 (x-x0) + A (x-x0)^2
    double f1, d1, B;   // right quadratic f1 + d1 (x-x1) + B (x-x1)^2
  };
  std::size_t locate(double x) const;

  std::vector<Knot> knots_;
  std::vector<Piece> pieces_;
  LeftExtension left_;
  RightExtension right_;
  bool has_minimizer_;
  std::string id_;
};

struct BuildOptions {
  double phi_zero_tol = 1e-10;
  double quad_rtol = 1e-12;
  double convexity_rel_tol = 1e-9;
};

struct BuiltObjective {
  ConvexObjective1D objective;
  // Psi(t_j) for each grid point (same order as the grid)
  std::vector<double> psi;
  // 0 when a closed-form tail was available, otherwise the quadrature error estimate
  double tail_error = 0.0;
  bool closed_form_tail = false;
};

// Reparametrized realization: knots at x_j = Psi(t_j) = int_{t_j}^inf sqrt(-g'),
// phi_j = g(t_j), phi'_j = sqrt(-g'(t_j)); plus the knot (0, 0, 0).
// Left extension x^2, right extension linear. X = Psi(grid.front()).
BuiltObjective build_objective(const DecayCurve& curve, const std::vector<double>& grid, const BuildOptions& opt = {});

// phi_env(t) = int_t^inf (s - t)(-g'(s))/s ds, evaluated as int_0^1 g(t/u) du.
DecayCurve build_no_minimizer_envelope(const DecayCurve& curve);

struct PreprocessOptions {
  double r0 = 0.0;           // raw is sampled on [r0, horizon]
  double horizon = 200.0;
  double resolution = 1.0 / 64.0;
  double tail_tol = 1e-3;    // sup over [horizon/2, horizon] must be <= tail_tol * global sup
};

// Running maximum from the right followed by a unit moving average. The result
// is C^1 and non-increasing, starts at r0 + 1, and beyond the horizon continues
// as M (H/t)^2 with M the running max at the horizon.
DecayCurve preprocess_monotone_smooth(const std::function<double(double)>& raw, const PreprocessOptions& opt = {});

enum class NoMinimizerVariant { gradient_flow, heavy_ball };

// Objective without minimizer realizing the (convex, decreasing, positive)
// curve along its gradient flow, or the rescaled f(x) = g(x / (2 sqrt g(t0)))
// for the heavy-ball variant. Knots cover `grid` only.
ConvexObjective1D build_no_minimizer_objective(const DecayCurve& curve, const std::vector<double>& grid,
                                               NoMinimizerVariant variant = NoMinimizerVariant::gradient_flow);

}  // namespace decaylab
