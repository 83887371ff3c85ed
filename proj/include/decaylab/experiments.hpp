#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "decaylab/parallel.hpp"
#include "decaylab/trajectory.hpp"

namespace decaylab {

enum class ToleranceProfile { standard, strict };
ToleranceProfile parse_tolerance_profile(const std::string& s);

struct SuiteOptions {
  Exec exec = Exec::parallel;
  ToleranceProfile profile = ToleranceProfile::standard;
  std::uint64_t seed = 20240607;
  // when set, criteria write their trajectories and reports below this directory
  std::filesystem::path artifacts;
};

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds; 0 = none
  std::vector<std::string> checks;  // one line per sub-check, prefixed ok/FAIL
  nlohmann::json values;

  void check(bool ok, std::string what);
};

struct Criterion {
  std::string id;
  std::string title;
  double time_limit;
  std::function<void(CriterionResult&, const SuiteOptions&)> body;
};

// The acceptance criteria of the primary component, in a fixed order.
const std::vector<Criterion>& acceptance_criteria();

// Runs the body, times it and folds the time limit into `passed`. Exceptions
// become a failed check.
CriterionResult run_criterion(const Criterion& c, const SuiteOptions& opt);

// Heavy-ball scheme on f = mu x^2 / 2 (x0 = 1), the four-panel comparison of
// alpha in {3, 10} against mu in {0.001, 0.1, 1, 10}.
struct Fig1Panel {
  double alpha = 0.0;
  double mu = 0.0;
  double t_transition = 0.0;  // alpha / (2 sqrt(mu))
  Trajectory trajectory;
};

struct Fig1Options {
  double h = 0.003;
  std::vector<double> alphas{3.0, 10.0};
  std::vector<double> mus{0.001, 0.1, 1.0, 10.0};
};

std::vector<Fig1Panel> fig1_panels(const Fig1Options& opt = {}, Exec exec = Exec::parallel);
// horizon: t_transition(max alpha) + 6 pi / sqrt(mu)
double fig1_horizon(double mu, const Fig1Options& opt = {});

struct Fig1Checks {
  bool no_early_sign_change = true;
  bool amplitude_floor = true;
  std::size_t crossings_after = 0;
  double crossing_interval = 0.0;  // last zero-crossing gap, 0 when fewer than two
  double min_abs_before = 0.0;
};
Fig1Checks fig1_checks(const Fig1Panel& p, double h);

// Writes fig1_alpha{a}_mu{m}.csv per panel plus fig1_markers.csv
// (alpha, mu, t_transition, file).
void write_fig1(const std::filesystem::path& dir, const std::vector<Fig1Panel>& panels);

// E sum_{n<=N} f(X_n) for f = mu x^2/2 under multiplicative noise, from the
// second-moment recursion E X_{n+1}^2 = ((1 - eta mu)^2 + (eta mu sigma)^2) E X_n^2.
double sgd_quadratic_expected_sum(double mu, double eta, double sigma, double x0, std::size_t N);

}  // namespace decaylab
