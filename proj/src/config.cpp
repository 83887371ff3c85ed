#include "decaylab/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "decaylab/error.hpp"

namespace decaylab {

namespace {

SourceMark mark_of(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return {};
  return {m.line + 1, m.column + 1};
}

std::string where(const std::string& source, SourceMark m) {
  if (m.line == 0) return source;
  return fmt::format("{}:{}:{}", source, m.line, m.column);
}

nlohmann::json scalar_json(const YAML::Node& n) {
  const std::string s = n.Scalar();
  if (n.Tag() == "!" || n.Tag() == "tag:yaml.org,2002:str") return s;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

nlohmann::json to_json(const YAML::Node& n, const std::string& path, std::map<std::string, SourceMark>& marks) {
  if (!path.empty()) marks.emplace(path, mark_of(n));
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return scalar_json(n);
    case YAML::NodeType::Sequence: {
      nlohmann::json a = nlohmann::json::array();
      std::size_t i = 0;
      for (const auto& c : n) a.push_back(to_json(c, fmt::format("{}[{}]", path, i++), marks));
      return a;
    }
    case YAML::NodeType::Map: {
      nlohmann::json o = nlohmann::json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        const auto sub = path.empty() ? key : path + "." + key;
        marks[sub] = mark_of(kv.first);
        o[key] = to_json(kv.second, sub, marks);
      }
      return o;
    }
  }
  return nullptr;
}

}  // namespace

void ExperimentConfig::fail(const std::string& key, const std::string& what) const {
  const auto it = marks.find(key);
  const SourceMark m = it != marks.end() ? it->second : mark;
  throw ConfigError(fmt::format("{}: experiment '{}': {}", where(source, m), name, what));
}

double ExperimentConfig::number(const std::string& key) const {
  if (!params.contains(key)) fail(key, fmt::format("missing required field '{}'", key));
  const auto& v = params.at(key);
  if (!v.is_number()) fail(key, fmt::format("field '{}' must be a number", key));
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, fmt::format("field '{}' must be finite", key));
  return d;
}

double ExperimentConfig::number(const std::string& key, double fallback) const {
  return params.contains(key) ? number(key) : fallback;
}

std::size_t ExperimentConfig::count(const std::string& key) const {
  const double d = number(key);
  if (d < 0.0 || d != std::floor(d)) fail(key, fmt::format("field '{}' must be a non-negative integer", key));
  return std::size_t(d);
}

std::size_t ExperimentConfig::count(const std::string& key, std::size_t fallback) const {
  return params.contains(key) ? count(key) : fallback;
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_string()) fail(key, fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  if (!params.contains(key)) fail(key, fmt::format("missing required field '{}'", key));
  const auto& v = params.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) fail(key, fmt::format("field '{}' must be a number or a list of numbers", key));
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, fmt::format("field '{}' must contain only numbers", key));
    out.push_back(e.get<double>());
  }
  return out;
}

const nlohmann::json& ExperimentConfig::object(const std::string& key) const {
  if (!params.contains(key)) fail(key, fmt::format("missing required field '{}'", key));
  const auto& v = params.at(key);
  if (!v.is_object()) fail(key, fmt::format("field '{}' must be a mapping", key));
  return v;
}

void ExperimentConfig::allow_only(const std::set<std::string>& allowed) const {
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (allowed.count(it.key())) continue;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(it.key(), fmt::format("unknown field '{}' for kind '{}' (allowed: {})", it.key(), kind, list));
  }
}

ConfigDocument parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", source, e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  ConfigDocument doc;
  doc.source = source;
  if (!root || root.IsNull()) throw ConfigError(fmt::format("{}: empty config document", source));
  if (!root.IsMap()) throw ConfigError(fmt::format("{}: top level must be a mapping", where(source, mark_of(root))));
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "schema_version" && key != "experiments")
      throw ConfigError(fmt::format("{}: unknown top-level field '{}' (allowed: schema_version, experiments)",
                                    where(source, mark_of(kv.first)), key));
  }
  if (!root["schema_version"])
    throw ConfigError(fmt::format("{}: missing required field 'schema_version'", source));
  try {
    doc.schema_version = root["schema_version"].as<int>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: schema_version must be an integer", where(source, mark_of(root["schema_version"]))));
  }
  if (doc.schema_version != kConfigSchemaVersion)
    throw ConfigError(fmt::format("{}: unsupported schema_version {} (this build reads {})",
                                  where(source, mark_of(root["schema_version"])), doc.schema_version,
                                  kConfigSchemaVersion));
  const YAML::Node list = root["experiments"];
  if (!list || list.IsNull()) return doc;
  if (!list.IsSequence())
    throw ConfigError(fmt::format("{}: 'experiments' must be a list", where(source, mark_of(list))));
  std::set<std::string> names;
  std::size_t idx = 0;
  for (const auto& node : list) {
    ExperimentConfig e;
    e.source = source;
    e.mark = mark_of(node);
    if (!node.IsMap())
      throw ConfigError(fmt::format("{}: experiment #{} must be a mapping", where(source, e.mark), idx));
    e.params = to_json(node, "", e.marks);
    if (!e.params.contains("kind") || !e.params["kind"].is_string())
      throw ConfigError(fmt::format("{}: experiment #{} needs a string field 'kind'", where(source, e.mark), idx));
    e.kind = e.params["kind"].get<std::string>();
    e.name = e.params.contains("name") && e.params["name"].is_string() ? e.params["name"].get<std::string>()
                                                                          : fmt::format("{}_{}", e.kind, idx);
    if (!names.insert(e.name).second)
      throw ConfigError(fmt::format("{}: duplicate experiment name '{}'", where(source, e.mark), e.name));
    e.params.erase("kind");
    e.params.erase("name");
    doc.experiments.push_back(std::move(e));
    ++idx;
  }
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace decaylab
