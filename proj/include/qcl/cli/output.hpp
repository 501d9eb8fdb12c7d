#pragma once

/// @file output.hpp
/// @brief Result tables and their CSV, JSON and SVG renderings.
///
/// Floats are written with 17 significant digits in CSV; JSON numbers use
/// the shortest representation that round-trips. Both are deterministic. The
/// JSON envelope keeps all run-dependent data under "timestamp".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcl/cli/config.hpp"

namespace qcl::cli {

inline constexpr const char* kVersion = "1.0.0";

struct Column {
  std::string name;
  std::string unit;
  bool operator==(const Column&) const = default;
};

struct Row {
  /// Library operation that produced the row.
  std::string operation;
  std::string label;
  std::vector<double> values;

  bool operator==(const Row& o) const {
    if (operation != o.operation || label != o.label || values.size() != o.values.size()) return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double a = values[i], b = o.values[i];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
    return true;
  }
};

struct Chart {
  int x = 0;
  std::vector<int> y;
  bool log_y = false;
  bool operator==(const Chart&) const = default;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::optional<Chart> chart;
  bool operator==(const Table&) const = default;

  void add(std::string operation, std::string label, std::vector<double> values) {
    if (values.size() != columns.size()) throw std::logic_error("Table::add: row width does not match columns");
    rows.push_back({std::move(operation), std::move(label), std::move(values)});
  }
};

struct Envelope {
  std::string command;
  std::string version = kVersion;
  RunConfig config;
  /// Command arguments beyond the global configuration.
  std::vector<std::pair<std::string, std::string>> parameters;
  std::string status;
  std::vector<Table> tables;
  /// Run-dependent data, excluded from determinism comparisons.
  std::string utc;
  double wall_time_s = 0.0;

  bool operator==(const Envelope&) const = default;
};

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out = "operation,case";
  for (const Column& c : t.columns) out += "," + csv_field(c.unit.empty() ? c.name : c.name + " [" + c.unit + "]");
  out += "\n";
  for (const Row& r : t.rows) {
    out += csv_field(r.operation) + "," + csv_field(r.label);
    for (double v : r.values) out += "," + format_real(v);
    out += "\n";
  }
  return out;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  return {{"n", c.n},
          {"K", c.K},
          {"lmax", c.l_max},
          {"tol_identity", c.tol_identity},
          {"tol_covariance", c.tol_covariance},
          {"tol_eigen", c.tol_eigen},
          {"tol_transfer", c.tol_transfer},
          {"tol_cutoff", c.tol_cutoff},
          {"out", c.out_dir},
          {"format", c.formats}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.n = j.at("n").get<int>();
  c.K = j.at("K").get<int>();
  c.l_max = j.at("lmax").get<int>();
  c.tol_identity = j.at("tol_identity").get<double>();
  c.tol_covariance = j.at("tol_covariance").get<double>();
  c.tol_eigen = j.at("tol_eigen").get<double>();
  c.tol_transfer = j.at("tol_transfer").get<double>();
  c.tol_cutoff = j.at("tol_cutoff").get<double>();
  c.out_dir = j.at("out").get<std::string>();
  c.formats = j.at("format").get<std::vector<std::string>>();
  return c;
}

/// Non-finite values are written as the strings "nan", "inf", "-inf".
inline nlohmann::json real_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("envelope: expected a number or one of \"nan\", \"inf\", \"-inf\"");
}

/// Envelope as JSON.
inline nlohmann::json to_json(const Envelope& e) {
  nlohmann::json tables = nlohmann::json::array();
  for (const Table& t : e.tables) {
    nlohmann::json cols = nlohmann::json::array();
    for (const Column& c : t.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    nlohmann::json rows = nlohmann::json::array();
    for (const Row& r : t.rows) {
      nlohmann::json vals = nlohmann::json::array();
      for (double v : r.values) vals.push_back(real_to_json(v));
      rows.push_back({{"operation", r.operation}, {"case", r.label}, {"values", vals}});
    }
    nlohmann::json jt = {{"name", t.name}, {"columns", cols}, {"rows", rows}};
    if (t.chart) jt["chart"] = {{"x", t.chart->x}, {"y", t.chart->y}, {"log_y", t.chart->log_y}};
    tables.push_back(jt);
  }
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [k, v] : e.parameters) params.push_back({k, v});
  return {{"command", e.command},
          {"version", e.version},
          {"config", config_to_json(e.config)},
          {"parameters", params},
          {"status", e.status},
          {"tables", tables},
          {"timestamp", {{"utc", e.utc}, {"wall_time_s", real_to_json(e.wall_time_s)}}}};
}

inline Envelope from_json(const nlohmann::json& j) {
  Envelope e;
  e.command = j.at("command").get<std::string>();
  e.version = j.at("version").get<std::string>();
  e.config = config_from_json(j.at("config"));
  for (const auto& p : j.at("parameters")) e.parameters.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  e.status = j.at("status").get<std::string>();
  for (const auto& jt : j.at("tables")) {
    Table t;
    t.name = jt.at("name").get<std::string>();
    for (const auto& c : jt.at("columns")) t.columns.push_back({c.at("name").get<std::string>(), c.at("unit").get<std::string>()});
    for (const auto& r : jt.at("rows")) {
      Row row{r.at("operation").get<std::string>(), r.at("case").get<std::string>(), {}};
      for (const auto& v : r.at("values")) row.values.push_back(real_from_json(v));
      t.rows.push_back(std::move(row));
    }
    if (jt.contains("chart")) {
      const auto& c = jt.at("chart");
      t.chart = Chart{c.at("x").get<int>(), c.at("y").get<std::vector<int>>(), c.at("log_y").get<bool>()};
    }
    e.tables.push_back(std::move(t));
  }
  e.utc = j.at("timestamp").at("utc").get<std::string>();
  e.wall_time_s = real_from_json(j.at("timestamp").at("wall_time_s"));
  return e;
}

inline std::string emit_json(const Envelope& e) { return to_json(e).dump(2) + "\n"; }

inline Envelope parse_json(const std::string& s) { return from_json(nlohmann::json::parse(s)); }

/// The JSON text with the timestamp object removed.
inline std::string deterministic_json(const std::string& s) {
  nlohmann::json j = nlohmann::json::parse(s);
  j.erase("timestamp");
  return j.dump(2);
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Minimal SVG line chart of the table's chart columns.
inline std::string to_svg(const Table& t) {
  if (!t.chart) throw std::logic_error("to_svg: table has no chart");
  const Chart& ch = *t.chart;
  const double W = 640, H = 400, L = 70, R = 20, T = 30, B = 50;
  auto tr = [&](double v) { return ch.log_y ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Row& r : t.rows) {
    const double x = r.values[ch.x];
    if (!std::isfinite(x)) continue;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    for (int k : ch.y) {
      const double y = tr(r.values[k]);
      if (!std::isfinite(y)) continue;
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return std::string(b);
  };
  auto tick = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return std::string(b);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << t.name << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    s << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
      << (ch.log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
  }
  const Column& xc = t.columns[ch.x];
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xc.name
    << (xc.unit.empty() ? "" : " [" + xc.unit + "]") << "</text>\n";
  for (std::size_t k = 0; k < ch.y.size(); ++k) {
    const char* col = colors[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const Row& r : t.rows) {
      const double x = r.values[ch.x], y = tr(r.values[ch.y[k]]);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      s << (first ? "" : " ") << num(px(x)) << "," << num(py(y));
      first = false;
    }
    s << "\"/>\n";
    s << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" fill=\"" << col << "\">"
      << t.columns[ch.y[k]].name << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

/// Writes <out>/<command>[_<table>].{csv,svg} and <out>/<command>.json.
inline std::vector<std::string> write_outputs(const Envelope& e) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  fs::create_directories(e.config.out_dir);
  auto put = [&](const std::string& name, const std::string& body) {
    const fs::path p = fs::path(e.config.out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << body;
    written.push_back(p.string());
  };
  for (const Table& t : e.tables) {
    const std::string stem = e.tables.size() == 1 ? e.command : e.command + "_" + t.name;
    if (wants(e.config, "csv")) put(stem + ".csv", to_csv(t));
    if (wants(e.config, "svg") && t.chart) put(stem + ".svg", to_svg(t));
  }
  if (wants(e.config, "json")) put(e.command + ".json", emit_json(e));
  return written;
}

}  // namespace qcl::cli
