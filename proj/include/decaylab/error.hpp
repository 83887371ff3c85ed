#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace decaylab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (bad parameter, wrong curve class).
struct PreconditionError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

// An iteration blew up; `step` is the index at which it was detected.
struct DivergenceError : NumericalError {
  DivergenceError(const std::string& what, long step_) : NumericalError(what), step(step_) {}
  long step;
};

// Adaptive integration gave up. Carries the last accepted state.
struct IntegrationError : NumericalError {
  IntegrationError(const std::string& what, double t_, std::vector<double> y_)
      : NumericalError(what), t(t_), y(std::move(y_)) {}
  double t;
  std::vector<double> y;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace decaylab
