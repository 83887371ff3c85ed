#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace decaylab {

struct TrajectoryMeta {
  std::string kind;  // gradient_flow | gd | sgd | heavy_ball_scheme | heavy_ball_ode | ...
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  std::string objective_id;
  std::optional<std::vector<double>> xstar;
  double fstar = 0.0;

  nlohmann::json to_json() const;
  std::optional<double> param(const std::string& key) const;
};

// Struct-of-arrays sample store; x and v are flattened row-major (n x dim).
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t dim, bool with_velocity, TrajectoryMeta meta = {});

  // Throws PreconditionError when t does not strictly increase.
  void push(double t, std::span<const double> x, std::span<const double> v, double f, double gnorm);
  void push(double t, std::span<const double> x, double f, double gnorm) { push(t, x, {}, f, gnorm); }
  void reserve(std::size_t n);

  std::size_t size() const { return t_.size(); }
  bool empty() const { return t_.empty(); }
  std::size_t dim() const { return dim_; }
  bool has_velocity() const { return with_velocity_; }

  double t(std::size_t i) const { return t_[i]; }
  std::span<const double> x(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }
  std::span<const double> v(std::size_t i) const { return {v_.data() + i * dim_, dim_}; }
  double f(std::size_t i) const { return f_[i]; }
  double gnorm(std::size_t i) const { return gnorm_[i]; }

  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& values() const { return f_; }
  const std::vector<double>& gnorms() const { return gnorm_; }

  TrajectoryMeta& meta() { return meta_; }
  const TrajectoryMeta& meta() const { return meta_; }

  // f - fstar at sample i
  double excess(std::size_t i) const { return f_[i] - meta_.fstar; }

  // header t,x0..,v0..,f,gnorm
  void write_csv(const std::filesystem::path& path) const;
  void write_meta(const std::filesystem::path& path) const;
  static Trajectory read_csv(const std::filesystem::path& path);

 private:
  std::size_t dim_ = 0;
  bool with_velocity_ = false;
  std::vector<double> t_, x_, v_, f_, gnorm_;
  TrajectoryMeta meta_;
};

struct SampleSchedule {
  enum class Kind { geometric, uniform, explicit_times } kind = Kind::geometric;
  double first = 1e-3;   // geometric: first positive sample time after t0
  double ratio = 1.05;   // geometric ratio
  double max_dt = 0.0;   // geometric: cap on sample spacing (0 = none)
  double dt = 0.0;       // uniform spacing
  std::vector<double> times;

  static SampleSchedule geometric(double first = 1e-3, double ratio = 1.05, double max_dt = 0.0);
  static SampleSchedule uniform(double dt);
  static SampleSchedule at(std::vector<double> times);

  // Sample times in (t0, t_end], always including t_end.
  std::vector<double> times_after(double t0, double t_end) const;
};

}  // namespace decaylab
