#include <betacfg/config.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include <betacfg/io.hpp>

namespace betacfg {

namespace {

// Complete key schema; anything else is rejected by name.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"run", {"seed", "out"}},
      {"data", {"n_per_class", "sigma_across"}},
      {"train",
       {"dataset", "steps", "batch", "lr", "p_uncond", "hidden",
        "hidden_layers", "embed_dim", "time_freqs", "T", "beta_start",
        "beta_end", "classifier", "classifier_steps", "classifier_hidden",
        "classifier_hidden_layers", "classifier_batch", "classifier_lr"}},
      {"sample",
       {"checkpoint", "rule", "w", "lambda", "omega", "a", "b", "gamma",
        "steps", "batch", "mode", "variance", "class", "cfgpp_renoise"}},
      {"eval",
       {"dataset", "samples", "checkpoint", "class", "radius",
        "reference_size", "calib_size", "calib_quantile", "results"}},
      {"sweep",
       {"checkpoint", "dataset", "class", "rule", "a_grid", "b_grid",
        "gamma_grid", "omega_grid", "lambda_grid", "steps", "batch",
        "workers"}},
      {"plot",
       {"kind", "dataset", "samples", "trajectories", "labels", "output",
        "title"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& section, const std::string& key,
                    const std::string& value) {
  const auto sec = schema().find(section);
  if (sec == schema().end())
    throw ConfigError("unknown config section [" + section + "]");
  if (!sec->second.count(key))
    throw ConfigError("unknown config key '" + section + "." + key + "'");
  values_[section + "." + key] = value;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");

  RunConfig cfg;
  std::string line;
  std::string section = "run";
  long line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("malformed section header at line " +
                          std::to_string(line_no));
      section = s.substr(1, s.size() - 2);
      if (!schema().count(section))
        throw ConfigError("unknown config section [" + section + "]");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " +
                        std::to_string(line_no));
    cfg.set(section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  const size_t dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value, got '" +
                      assignment + "'");
  set(trim(assignment.substr(0, dot)),
      trim(assignment.substr(dot + 1, eq - dot - 1)),
      trim(assignment.substr(eq + 1)));
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: '" +
                      it->second + "'");
  }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  return int(get_long(key, fallback));
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_double(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: '" +
                      it->second + "'");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" +
                    it->second + "'");
}

std::uint64_t RunConfig::get_seed(std::uint64_t fallback) const {
  const auto it = values_.find("run.seed");
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("run.seed is not an unsigned integer: '" + it->second +
                      "'");
  }
}

std::vector<double> RunConfig::get_grid(
    const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream is(it->second);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    const std::string t = trim(cell);
    if (t.empty())
      throw ConfigError("empty entry in grid '" + key + "'");
    out.push_back(parse_double(t));
  }
  if (out.empty()) throw ConfigError("empty grid '" + key + "'");
  return out;
}

}  // namespace betacfg
