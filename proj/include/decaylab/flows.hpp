#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "decaylab/objective.hpp"
#include "decaylab/ode.hpp"
#include "decaylab/parallel.hpp"
#include "decaylab/trajectory.hpp"

namespace decaylab {

struct GradientFlowOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  SampleSchedule schedule = SampleSchedule::geometric();
};

// x' = -grad f(x) on [0, t_end].
Trajectory integrate_gradient_flow(const Objective& obj, std::vector<double> x0, double t_end,
                                   const GradientFlowOptions& opt = {});

struct GdOptions {
  std::optional<double> L;         // gradient Lipschitz constant; enables the eta < 2/L check
  double divergence_tol = 1e-12;   // relative increase of f that counts as divergence
};

// x_{n+1} = x_n - eta grad f(x_n); N+1 samples at t = n.
Trajectory run_gd(const Objective& obj, std::vector<double> x0, double eta, std::size_t N, const GdOptions& opt = {});

enum class NoiseModel { rademacher, gaussian };

struct SgdOptions {
  std::optional<double> L;
  NoiseModel noise = NoiseModel::rademacher;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

// g_n = (1 + sigma zeta_n) grad f(x_n), zeta_n iid mean 0 variance 1. Replica r
// draws from the counter stream (seed, r).
std::vector<Trajectory> run_sgd(const Objective& obj, const std::vector<double>& x0, double eta, double sigma,
                                std::size_t N, const SgdOptions& opt = {});

struct HeavyBallSchemeOptions {
  double blowup = 1e150;  // |x| above this counts as divergence
};

// x_{n+1} = y_n - h grad f(y_n), y_{n+1} = x_{n+1} + n/(n+alpha) (x_{n+1} - x_n), y_0 = x_0.
// Sample n sits at t_n = n sqrt(h); its velocity is (x_{n+1} - x_n)/sqrt(h).
Trajectory run_heavy_ball_scheme(const Objective& obj, std::vector<double> x0, double alpha, double h, std::size_t N,
                                 const HeavyBallSchemeOptions& opt = {});

struct Friction {
  enum class Kind { nesterov, constant } kind = Kind::nesterov;
  double coeff = 3.0;  // alpha for nesterov (alpha/t), beta for constant
  static Friction nesterov(double alpha) { return {Kind::nesterov, alpha}; }
  static Friction constant(double beta) { return {Kind::constant, beta}; }
};

struct HeavyBallOdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  std::optional<double> t_start;  // default: 0 for constant friction, 1e-3 * t_transition (or 1e-3) otherwise
  std::optional<double> mu;       // curvature hint for the default t_start
  double h = 0.0;                 // scheme step used by the default t_start rule
  SampleSchedule schedule = SampleSchedule::geometric();
};

// x' = v, v' = -(friction) v - grad f(x) with v(t_start) = 0, x(t_start) = x0.
Trajectory integrate_heavy_ball_ode(const Objective& obj, std::vector<double> x0, Friction friction, double t_end,
                                    const HeavyBallOdeOptions& opt = {});

struct OscillatorSpec {
  double mu = 1.0;
  double alpha = 3.0;
  double x0 = 1.0;
  OscillatorSpec(double mu_, double alpha_, double x0_ = 1.0);
  double t_transition() const;
  double asymptotic_frequency() const;
};

struct OscillatorState {
  double x;
  double v;
};

// Constant friction x'' + beta x' + mu x = 0, x(0) = x0, x'(0) = 0.
OscillatorState classical_oscillator_solution(double beta, double mu, double x0, double t);

std::string to_string(NoiseModel m);
NoiseModel parse_noise_model(const std::string& s);

}  // namespace decaylab
