#include "decaylab/objective.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "decaylab/error.hpp"

namespace decaylab {

QuadraticObjective::QuadraticObjective(std::vector<double> mu) : mu_(std::move(mu)) {
  if (mu_.empty()) throw PreconditionError("quadratic: need at least one coordinate");
  for (double m : mu_)
    if (!(m >= 0.0)) throw PreconditionError("quadratic: curvatures must be non-negative");
}

double QuadraticObjective::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) s += mu_[i] * x[i] * x[i];
  return 0.5 * s;
}

void QuadraticObjective::gradient(std::span<const double> x, std::span<double> g) const {
  for (std::size_t i = 0; i < mu_.size(); ++i) g[i] = mu_[i] * x[i];
}

std::string QuadraticObjective::id() const {
  if (mu_.size() == 1) return fmt::format("quadratic(mu={})", mu_[0]);
  return fmt::format("quadratic(dim={})", mu_.size());
}

std::optional<double> QuadraticObjective::lipschitz() const { return *std::max_element(mu_.begin(), mu_.end()); }

PowerObjective::PowerObjective(double c, double p) : c_(c), p_(p) {
  if (!(c > 0.0) || !(p >= 2.0)) throw PreconditionError("power objective: need c > 0 and p >= 2");
}

double PowerObjective::value(std::span<const double> x) const { return c_ * std::pow(std::abs(x[0]), p_); }

void PowerObjective::gradient(std::span<const double> x, std::span<double> g) const {
  const double a = std::abs(x[0]);
  g[0] = a == 0.0 ? 0.0 : c_ * p_ * std::pow(a, p_ - 1.0) * (x[0] > 0 ? 1.0 : -1.0);
}

std::string PowerObjective::id() const { return fmt::format("power(c={},p={})", c_, p_); }

void ZeroObjective::gradient(std::span<const double>, std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
}

std::optional<std::vector<double>> Objective1D::minimizer() const {
  if (!phi_.has_minimizer()) return std::nullopt;
  return std::vector<double>{0.0};
}

ScaledObjective::ScaledObjective(ObjectivePtr inner, double c) : inner_(std::move(inner)), c_(c) {
  if (!(c > 0.0)) throw PreconditionError("scaled objective: need c > 0");
}

void ScaledObjective::gradient(std::span<const double> x, std::span<double> g) const {
  inner_->gradient(x, g);
  for (double& v : g) v *= c_;
}

std::string ScaledObjective::id() const { return fmt::format("{}*{}", c_, inner_->id()); }

std::optional<double> ScaledObjective::lipschitz() const {
  auto L = inner_->lipschitz();
  if (!L) return std::nullopt;
  return c_ * *L;
}

}  // namespace decaylab
