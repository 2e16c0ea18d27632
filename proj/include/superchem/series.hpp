#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "superchem/config.hpp"
#include "superchem/errors.hpp"
#include "superchem/version.hpp"

namespace superchem {

/// Shortest exact decimal form: 17 significant digits round-trip any
/// double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Ordered key/value metadata block carried by every output file.
struct Metadata {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    entries.emplace_back(key, format_double(value));
  }
  void add(const std::string& key, std::int64_t value) {
    entries.emplace_back(key, std::to_string(value));
  }
  void add(const std::string& key, std::uint64_t value) {
    entries.emplace_back(key, std::to_string(value));
  }
  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

/// Echo of the run configuration, sufficient to reproduce the file
/// byte-for-byte.  Worker count and output destination are deliberately
/// omitted: neither affects the computed numbers.
inline Metadata echo_spec(const RunSpec& spec) {
  Metadata m;
  m.add("tool", std::string(kToolName) + " " + kVersion);
  m.add("schema_version", static_cast<std::int64_t>(kConfigSchemaVersion));
  m.add("mode", to_string(spec.mode));
  if (spec.mode == RunMode::reduce) {
    m.add("raman_gamma_pa", spec.raman.gamma_pa);
    m.add("raman_omega", spec.raman.omega);
    m.add("raman_delta", spec.raman.delta);
    m.add("raman_lambda_a", spec.raman.lambda_a);
    m.add("raman_lambda_g", spec.raman.lambda_g);
    m.add("raman_g_rf", spec.raman.g_rf);
    return m;
  }
  m.add("g_rf", spec.params.g_rf);
  m.add("delta", spec.params.delta);
  m.add("gamma_decay", spec.params.gamma_decay);
  m.add("lambda_a", spec.params.lambda_a);
  m.add("lambda_b", spec.params.lambda_b);
  m.add("gamma_pa_hz", spec.params.gamma_pa);
  m.add("n0", spec.n0);
  m.add("tau_end", spec.grid.tau_end);
  m.add("dt", spec.grid.dt);
  m.add("sample_stride", static_cast<std::int64_t>(spec.grid.sample_stride));
  if (spec.mode != RunMode::exact) {
    m.add("guard_factor", spec.guard_factor);
  }
  if (spec.mode == RunMode::pp || spec.mode == RunMode::compare) {
    m.add("n_traj", static_cast<std::int64_t>(spec.n_traj));
    m.add("master_seed", spec.master_seed);
  }
  if (spec.mode == RunMode::exact) {
    m.add("epsilon_tail", spec.epsilon_tail);
    m.add("max_sector", static_cast<std::int64_t>(spec.max_sector));
  }
  return m;
}

struct Series {
  Metadata meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_series_csv(const std::string& path, const Series& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& [k, v] : s.meta.entries) {
    out << "# " << k << " = " << v << "\n";
  }
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    out << (c ? "," : "") << s.columns[c];
  }
  out << "\n";
  for (const auto& row : s.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline void write_series_json(const std::string& path, const Series& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s.meta.entries) meta[k] = v;
  j["metadata"] = meta;
  j["columns"] = s.columns;
  j["rows"] = s.rows;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline Series read_series_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  Series s;
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t eq = line.find(" = ");
      if (eq != std::string::npos) {
        s.meta.add(line.substr(2, eq - 2), line.substr(eq + 3));
      }
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!header_done) {
      while (std::getline(ss, cell, ',')) s.columns.push_back(cell);
      header_done = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::strtod(cell.c_str(), nullptr));
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

inline Series read_series_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  Series s;
  for (const auto& [k, v] : j.at("metadata").items()) {
    s.meta.add(k, v.get<std::string>());
  }
  s.columns = j.at("columns").get<std::vector<std::string>>();
  s.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  return s;
}

}  // namespace superchem
