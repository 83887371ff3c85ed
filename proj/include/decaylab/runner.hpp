#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "decaylab/config.hpp"
#include "decaylab/experiments.hpp"
#include "decaylab/verify.hpp"

namespace decaylab {

struct RunContext {
  std::filesystem::path out;  // experiment outputs go to out / name (out itself for an empty name)
  std::uint64_t seed = 20240607;
  ToleranceProfile profile = ToleranceProfile::standard;
  Exec exec = Exec::parallel;
};

struct ExperimentOutcome {
  std::string name;
  std::string kind;
  Verdict verdict = Verdict::pass;
  std::vector<std::string> files;  // relative to the experiment directory, in write order
  nlohmann::json summary;
};

// Kinds accepted in configs, in CLI subcommand order.
const std::vector<std::string>& experiment_kinds();

// Throws ConfigError for bad parameters (with the source position), other
// decaylab errors for failures while running.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const RunContext& ctx);

// fail if any fails, else inconclusive if any is, else pass (pass for none)
Verdict combine(const std::vector<Verdict>& vs);

// 0 pass, 1 fail, 2 inconclusive
int exit_code(Verdict v);

}  // namespace decaylab
