#pragma once

/// @file config.hpp
/// @brief Run configuration for the command-line front end.
///
/// Sources are layered defaults < config file < flags. The file format is
/// UTF-8 lines "key = value" with '#' starting a comment.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcl::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int n = 5;
  int K = 128;
  int l_max = 8;
  /// Tolerances used by `verify`.
  double tol_identity = 1e-12;
  double tol_covariance = 1e-8;
  double tol_eigen = 1e-8;
  double tol_transfer = 1e-8;
  double tol_cutoff = 1e-6;
  std::string out_dir = ".";
  std::vector<std::string> formats{"csv"};

  bool operator==(const RunConfig&) const = default;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  int r = 0;
  try {
    r = std::stoi(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  return r;
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double r = 0.0;
  try {
    r = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return r;
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& s : split(v, ',')) out.push_back(parse_real(key, s));
  if (out.empty()) throw ConfigError("config: " + key + " expects a comma-separated list of numbers");
  return out;
}

/// Sets one key; unknown keys are errors.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.n = parse_int(key, value);
  else if (key == "K") c.K = parse_int(key, value);
  else if (key == "lmax" || key == "l_max") c.l_max = parse_int(key, value);
  else if (key == "tol_identity") c.tol_identity = parse_real(key, value);
  else if (key == "tol_covariance") c.tol_covariance = parse_real(key, value);
  else if (key == "tol_eigen") c.tol_eigen = parse_real(key, value);
  else if (key == "tol_transfer") c.tol_transfer = parse_real(key, value);
  else if (key == "tol_cutoff") c.tol_cutoff = parse_real(key, value);
  else if (key == "out") c.out_dir = value;
  else if (key == "format") c.formats = split(value, ',');
  else throw ConfigError("config: unknown key '" + key + "'");
}

inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  for (const auto& [k, v] : parse_config_text(ss.str())) apply_setting(c, k, v);
}

/// Rejects invalid combinations before any computation starts.
inline void validate(const RunConfig& c) {
  if (c.n < 5) throw ConfigError("config: n must be at least 5");
  if (c.K < 8) throw ConfigError("config: K must be at least 8");
  if (c.l_max < 2) throw ConfigError("config: lmax must be at least 2");
  for (double t : {c.tol_identity, c.tol_covariance, c.tol_eigen, c.tol_transfer, c.tol_cutoff}) {
    if (!(t > 0.0)) throw ConfigError("config: tolerances must be positive");
  }
  static const std::set<std::string> known{"csv", "json", "svg"};
  if (c.formats.empty()) throw ConfigError("config: at least one output format is required");
  for (const std::string& f : c.formats) {
    if (!known.count(f)) throw ConfigError("config: unknown format '" + f + "' (csv, json, svg)");
  }
}

inline bool wants(const RunConfig& c, const std::string& fmt) {
  return std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

}  // namespace qcl::cli
