#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

namespace decaylab {

inline constexpr int kConfigSchemaVersion = 1;

struct SourceMark {
  int line = 0;    // 1-based, 0 = unknown
  int column = 0;
};

// One entry of the `experiments` list. Values are kept as JSON; `marks` maps
// "key" and "key.sub" paths to their source positions for diagnostics.
struct ExperimentConfig {
  std::string name;
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  SourceMark mark;
  std::map<std::string, SourceMark> marks;
  std::string source;  // file name used in diagnostics

  // ConfigError "source:line:col: experiment 'name': <what>" at the key's mark
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  bool has(const std::string& key) const { return params.contains(key); }
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  const nlohmann::json& object(const std::string& key) const;
  // rejects keys outside `allowed` (plus name and kind)
  void allow_only(const std::set<std::string>& allowed) const;
};

struct ConfigDocument {
  int schema_version = kConfigSchemaVersion;
  std::string source;
  std::vector<ExperimentConfig> experiments;
};

// Throws ConfigError with "source:line:col" diagnostics.
ConfigDocument parse_config(const std::string& text, const std::string& source = "<config>");
ConfigDocument load_config(const std::filesystem::path& path);

}  // namespace decaylab
