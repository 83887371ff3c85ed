#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaylab/construct.hpp"

namespace decaylab {

class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
  virtual std::string id() const = 0;
  virtual std::optional<std::vector<double>> minimizer() const { return std::nullopt; }
  virtual double infimum() const { return 0.0; }
  // global Lipschitz constant of the gradient, when known
  virtual std::optional<double> lipschitz() const { return std::nullopt; }
};

using ObjectivePtr = std::shared_ptr<const Objective>;

// f(x) = 1/2 sum_i mu_i x_i^2
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(std::vector<double> mu);
  std::size_t dim() const override { return mu_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  std::string id() const override;
  std::optional<std::vector<double>> minimizer() const override { return std::vector<double>(mu_.size(), 0.0); }
  std::optional<double> lipschitz() const override;
  const std::vector<double>& mu() const { return mu_; }

 private:
  std::vector<double> mu_;
};

// f(x) = c |x|^p in one dimension (p >= 2 keeps the gradient locally Lipschitz)
class PowerObjective final : public Objective {
 public:
  PowerObjective(double c, double p);
  std::size_t dim() const override { return 1; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  std::string id() const override;
  std::optional<std::vector<double>> minimizer() const override { return std::vector<double>{0.0}; }

 private:
  double c_, p_;
};

class ZeroObjective final : public Objective {
 public:
  explicit ZeroObjective(std::size_t dim) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  double value(std::span<const double>) const override { return 0.0; }
  void gradient(std::span<const double>, std::span<double> g) const override;
  std::string id() const override { return "zero"; }
  std::optional<double> lipschitz() const override { return 0.0; }

 private:
  std::size_t dim_;
};

class Objective1D final : public Objective {
 public:
  explicit Objective1D(ConvexObjective1D phi) : phi_(std::move(phi)) {}
  std::size_t dim() const override { return 1; }
  double value(std::span<const double> x) const override { return phi_.value(x[0]); }
  void gradient(std::span<const double> x, std::span<double> g) const override { g[0] = phi_.slope(x[0]); }
  std::string id() const override { return phi_.id(); }
  std::optional<std::vector<double>> minimizer() const override;
  const ConvexObjective1D& phi() const { return phi_; }

 private:
  ConvexObjective1D phi_;
};

// c * f
class ScaledObjective final : public Objective {
 public:
  ScaledObjective(ObjectivePtr inner, double c);
  std::size_t dim() const override { return inner_->dim(); }
  double value(std::span<const double> x) const override { return c_ * inner_->value(x); }
  void gradient(std::span<const double> x, std::span<double> g) const override;
  std::string id() const override;
  std::optional<std::vector<double>> minimizer() const override { return inner_->minimizer(); }
  double infimum() const override { return c_ * inner_->infimum(); }
  std::optional<double> lipschitz() const override;

 private:
  ObjectivePtr inner_;
  double c_;
};

}  // namespace decaylab
