#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <betacfg/types.hpp>

namespace betacfg {

// Run configuration: one INI-style file of [section] blocks with key = value
// lines, plus command-line overrides. Parsing is strict: a key outside the
// known schema fails with the offending name.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path);
  // "section.key=value"
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_seed(std::uint64_t fallback) const;
  // comma-separated list of numbers
  std::vector<double> get_grid(const std::string& key,
                               const std::vector<double>& fallback) const;

 private:
  void set(const std::string& section, const std::string& key,
           const std::string& value);

  std::map<std::string, std::string> values_;  // "section.key" -> value
};

}  // namespace betacfg
