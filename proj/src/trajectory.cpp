#include "decaylab/trajectory.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "decaylab/csv.hpp"
#include "decaylab/error.hpp"

namespace decaylab {

nlohmann::json TrajectoryMeta::to_json() const {
  nlohmann::json j = {{"kind", kind}, {"seed", seed}, {"objective_id", objective_id}, {"fstar", fstar}};
  j["params"] = nlohmann::json::object();
  for (const auto& [k, v] : params) j["params"][k] = v;
  j["xstar"] = xstar ? nlohmann::json(*xstar) : nlohmann::json(nullptr);
  return j;
}

std::optional<double> TrajectoryMeta::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

Trajectory::Trajectory(std::size_t dim, bool with_velocity, TrajectoryMeta meta)
    : dim_(dim), with_velocity_(with_velocity), meta_(std::move(meta)) {}

void Trajectory::reserve(std::size_t n) {
  t_.reserve(n);
  x_.reserve(n * dim_);
  if (with_velocity_) v_.reserve(n * dim_);
  f_.reserve(n);
  gnorm_.reserve(n);
}

void Trajectory::push(double t, std::span<const double> x, std::span<const double> v, double f, double gnorm) {
  if (!t_.empty() && !(t > t_.back()))
    throw PreconditionError(fmt::format("trajectory: time {} does not increase (last {})", t, t_.back()));
  if (x.size() != dim_) throw PreconditionError("trajectory: state has wrong dimension");
  if (with_velocity_ && v.size() != dim_) throw PreconditionError("trajectory: velocity missing or wrong dimension");
  if (gnorm < 0.0) throw PreconditionError("trajectory: negative gradient norm");
  t_.push_back(t);
  x_.insert(x_.end(), x.begin(), x.end());
  if (with_velocity_) v_.insert(v_.end(), v.begin(), v.end());
  f_.push_back(f);
  gnorm_.push_back(gnorm);
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header{"t"};
  for (std::size_t i = 0; i < dim_; ++i) header.push_back(fmt::format("x{}", i));
  if (with_velocity_)
    for (std::size_t i = 0; i < dim_; ++i) header.push_back(fmt::format("v{}", i));
  header.push_back("f");
  header.push_back("gnorm");
  CsvWriter w(path, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < size(); ++k) {
    row.clear();
    row.push_back(t_[k]);
    for (double c : x(k)) row.push_back(c);
    if (with_velocity_)
      for (double c : v(k)) row.push_back(c);
    row.push_back(f_[k]);
    row.push_back(gnorm_[k]);
    w.row(row);
  }
}

void Trajectory::write_meta(const std::filesystem::path& path) const {
  auto out = open_output(path);
  nlohmann::json j = meta_.to_json();
  j["dim"] = dim_;
  j["has_velocity"] = with_velocity_;
  j["samples"] = size();
  out << j.dump(2) << '\n';
}

Trajectory Trajectory::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t nx = 0, nv = 0;
  for (const auto& h : header) {
    if (h.size() > 1 && h[0] == 'x') ++nx;
    if (h.size() > 1 && h[0] == 'v') ++nv;
  }
  if (header.size() != 3 + nx + nv || header.front() != "t" || header[header.size() - 2] != "f" ||
      header.back() != "gnorm")
    throw Error(path.string() + ": unexpected trajectory header");
  Trajectory tr(nx, nv > 0);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != header.size()) throw Error(fmt::format("{}: row {} has {} cells", path.string(), row, vals.size()));
    std::span<const double> all(vals);
    tr.push(vals[0], all.subspan(1, nx), nv ? all.subspan(1 + nx, nv) : std::span<const double>{},
            vals[vals.size() - 2], vals.back());
  }
  return tr;
}

SampleSchedule SampleSchedule::geometric(double first, double ratio, double max_dt) {
  SampleSchedule s;
  s.kind = Kind::geometric;
  s.first = first;
  s.ratio = ratio;
  s.max_dt = max_dt;
  return s;
}

SampleSchedule SampleSchedule::uniform(double dt) {
  SampleSchedule s;
  s.kind = Kind::uniform;
  s.dt = dt;
  return s;
}

SampleSchedule SampleSchedule::at(std::vector<double> times) {
  SampleSchedule s;
  s.kind = Kind::explicit_times;
  s.times = std::move(times);
  return s;
}

std::vector<double> SampleSchedule::times_after(double t0, double t_end) const {
  std::vector<double> out;
  if (!(t_end > t0)) return out;
  switch (kind) {
    case Kind::geometric: {
      if (!(first > 0.0) || !(ratio > 1.0)) throw PreconditionError("geometric schedule: need first > 0, ratio > 1");
      double next = first;
      while (next <= t0) next *= ratio;
      double prev = t0;
      while (true) {
        double cand = next;
        if (max_dt > 0.0 && cand - prev > max_dt) cand = prev + max_dt;
        if (cand >= t_end) break;
        out.push_back(cand);
        prev = cand;
        if (cand == next) next *= ratio;
      }
      break;
    }
    case Kind::uniform: {
      if (!(dt > 0.0)) throw PreconditionError("uniform schedule: need dt > 0");
      for (std::size_t k = 1;; ++k) {
        const double t = t0 + double(k) * dt;
        if (t >= t_end * (1.0 - 1e-14)) break;
        out.push_back(t);
      }
      break;
    }
    case Kind::explicit_times:
      for (double t : times)
        if (t > t0 && t < t_end && (out.empty() || t > out.back())) out.push_back(t);
      break;
  }
  out.push_back(t_end);
  return out;
}

}  // namespace decaylab
