#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "superchem/errors.hpp"
#include "superchem/model.hpp"
#include "superchem/raman.hpp"

namespace superchem {

enum class RunMode { mf, pp, exact, compare, reduce };
enum class OutputFormat { csv, json };

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::mf: return "mf";
    case RunMode::pp: return "pp";
    case RunMode::exact: return "exact";
    case RunMode::compare: return "compare";
    case RunMode::reduce: return "reduce";
  }
  return "?";
}

inline const char* to_string(OutputFormat f) {
  return f == OutputFormat::csv ? "csv" : "json";
}

/// A fully validated run description.  Defaults are filled in by
/// parse_config; fields not applicable to the mode keep their defaults.
struct RunSpec {
  RunMode mode = RunMode::mf;
  ModelParams params;
  RamanParams raman;
  double n0 = 0.0;
  TimeGrid grid;
  std::int64_t n_traj = 0;
  std::uint64_t master_seed = 0;
  bool master_seed_set = false;
  int n_workers = 0;  ///< 0 = one worker per hardware thread
  double epsilon_tail = 1e-8;
  int max_sector = 40;
  double guard_factor = 1e6;
  std::string output;  ///< empty = "<mode>_out.<format>"
  OutputFormat format = OutputFormat::csv;
};

namespace detail {

enum : unsigned {
  kMf = 1u,
  kPp = 2u,
  kExact = 4u,
  kCompare = 8u,
  kReduce = 16u,
  kSim = kMf | kPp | kExact | kCompare,
  kAll = kSim | kReduce,
};

struct KeyInfo {
  const char* name;
  unsigned modes;
};

/// The documented schema (version 1).  Keys are case-sensitive.
inline const std::vector<KeyInfo>& config_schema() {
  static const std::vector<KeyInfo> schema = {
      {"mode", kAll},
      {"g_rf", kSim},
      {"delta", kSim},
      {"gamma_decay", kSim},
      {"lambda_a", kSim},
      {"lambda_b", kSim},
      {"gamma_pa_hz", kSim},
      {"n0", kSim},
      {"tau_end", kSim},
      {"dt", kSim},
      {"sample_stride", kSim},
      {"guard_factor", kMf | kPp | kCompare},
      {"n_traj", kPp | kCompare},
      {"master_seed", kPp | kCompare},
      {"n_workers", kPp | kCompare},
      {"epsilon_tail", kExact},
      {"max_sector", kExact},
      {"output", kAll},
      {"format", kAll},
      {"raman_gamma_pa", kReduce},
      {"raman_omega", kReduce},
      {"raman_delta", kReduce},
      {"raman_lambda_a", kReduce},
      {"raman_lambda_g", kReduce},
      {"raman_g_rf", kReduce},
  };
  return schema;
}

inline unsigned mode_bit(RunMode m) {
  switch (m) {
    case RunMode::mf: return kMf;
    case RunMode::pp: return kPp;
    case RunMode::exact: return kExact;
    case RunMode::compare: return kCompare;
    case RunMode::reduce: return kReduce;
  }
  return 0;
}

struct RawValue {
  std::string text;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const RawValue& v) {
  char* end = nullptr;
  const double x = std::strtod(v.text.c_str(), &end);
  if (end == v.text.c_str() || *end != '\0') {
    throw ConfigError("config line " + std::to_string(v.line) +
                      ": value of '" + key + "' is not a number");
  }
  if (!std::isfinite(x)) {
    throw ConfigError("config line " + std::to_string(v.line) +
                      ": non-finite value for '" + key + "'");
  }
  return x;
}

inline std::int64_t parse_int(const std::string& key, const RawValue& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.text.c_str(), &end, 10);
  if (end == v.text.c_str() || *end != '\0') {
    throw ConfigError("config line " + std::to_string(v.line) +
                      ": value of '" + key + "' is not an integer");
  }
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const RawValue& v) {
  char* end = nullptr;
  if (!v.text.empty() && v.text[0] == '-') {
    throw ConfigError("config line " + std::to_string(v.line) + ": '" + key +
                      "' must be a non-negative integer");
  }
  const unsigned long long x = std::strtoull(v.text.c_str(), &end, 10);
  if (end == v.text.c_str() || *end != '\0') {
    throw ConfigError("config line " + std::to_string(v.line) +
                      ": value of '" + key + "' is not an integer");
  }
  return x;
}

}  // namespace detail

/// Parse the flat key = value configuration text (schema version 1).
/// '#' starts a comment; blank lines are ignored.  Unknown keys, keys that
/// do not apply to the requested mode, duplicates, missing required keys
/// and malformed numbers are all hard errors carrying the line number.
///
/// allow_random_seed: when the caller offers entropy for a missing
/// master_seed (the CLI --random-seed flag), its absence is not an error;
/// the returned spec has master_seed_set = false and the caller must fill
/// the seed before running.
inline RunSpec parse_config(const std::string& text,
                            bool allow_random_seed = false) {
  using namespace detail;

  std::map<std::string, RawValue> raw;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const KeyInfo* info = nullptr;
    for (const KeyInfo& k : config_schema()) {
      if (key == k.name) {
        info = &k;
        break;
      }
    }
    if (info == nullptr) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    if (raw.count(key) != 0) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
    raw[key] = {value, line_no};
  }

  if (raw.count("mode") == 0) {
    throw ConfigError("config: missing required key 'mode'");
  }
  RunSpec spec;
  {
    const std::string& m = raw["mode"].text;
    if (m == "mf") spec.mode = RunMode::mf;
    else if (m == "pp") spec.mode = RunMode::pp;
    else if (m == "exact") spec.mode = RunMode::exact;
    else if (m == "compare") spec.mode = RunMode::compare;
    else if (m == "reduce") spec.mode = RunMode::reduce;
    else {
      throw ConfigError("config line " + std::to_string(raw["mode"].line) +
                        ": unknown mode '" + m + "'");
    }
  }
  const unsigned mode = mode_bit(spec.mode);

  for (const auto& [key, v] : raw) {
    const KeyInfo* info = nullptr;
    for (const KeyInfo& k : config_schema()) {
      if (key == k.name) info = &k;
    }
    if ((info->modes & mode) == 0) {
      throw ConfigError("config line " + std::to_string(v.line) + ": key '" +
                        key + "' does not apply to mode '" +
                        to_string(spec.mode) + "'");
    }
  }

  auto require = [&](const char* key) -> RawValue& {
    auto it = raw.find(key);
    if (it == raw.end()) {
      throw ConfigError(std::string("config: mode '") + to_string(spec.mode) +
                        "' requires key '" + key + "'");
    }
    return it->second;
  };
  auto get_real = [&](const char* key, double dflt) {
    auto it = raw.find(key);
    return it == raw.end() ? dflt : parse_real(key, it->second);
  };

  if (spec.mode == RunMode::reduce) {
    spec.raman.gamma_pa = parse_real("raman_gamma_pa", require("raman_gamma_pa"));
    spec.raman.omega = parse_real("raman_omega", require("raman_omega"));
    spec.raman.delta = parse_real("raman_delta", require("raman_delta"));
    spec.raman.lambda_a = get_real("raman_lambda_a", 0.0);
    spec.raman.lambda_g = get_real("raman_lambda_g", 0.0);
    spec.raman.g_rf = get_real("raman_g_rf", 0.0);
    spec.raman.validate();
  } else {
    spec.params.g_rf = parse_real("g_rf", require("g_rf"));
    spec.params.delta = get_real("delta", 0.0);
    spec.params.gamma_decay = get_real("gamma_decay", 0.0);
    spec.params.lambda_a = get_real("lambda_a", 0.0);
    spec.params.lambda_b = get_real("lambda_b", 0.0);
    spec.params.gamma_pa = get_real("gamma_pa_hz", 1.0);
    spec.params.validate();

    spec.n0 = parse_real("n0", require("n0"));
    if (spec.n0 < 0.0) {
      throw ConfigError("config: 'n0' must be >= 0");
    }
    spec.grid.tau_end = parse_real("tau_end", require("tau_end"));
    spec.grid.dt = parse_real("dt", require("dt"));
    if (raw.count("sample_stride") != 0) {
      spec.grid.sample_stride = parse_int("sample_stride", raw["sample_stride"]);
    }
    spec.grid.validate();
    spec.guard_factor = get_real("guard_factor", 1e6);
    if (!(spec.guard_factor > 0.0)) {
      throw ConfigError("config: 'guard_factor' must be > 0");
    }

    if (spec.mode == RunMode::pp || spec.mode == RunMode::compare) {
      spec.n_traj = parse_int("n_traj", require("n_traj"));
      if (spec.n_traj < 2) {
        throw ConfigError("config: 'n_traj' must be >= 2");
      }
      if (raw.count("master_seed") != 0) {
        spec.master_seed = parse_u64("master_seed", raw["master_seed"]);
        spec.master_seed_set = true;
      } else if (!allow_random_seed) {
        throw ConfigError(
            "config: mode '" + std::string(to_string(spec.mode)) +
            "' requires key 'master_seed' (or pass --random-seed)");
      }
      if (raw.count("n_workers") != 0) {
        const std::int64_t w = parse_int("n_workers", raw["n_workers"]);
        if (w < 0) throw ConfigError("config: 'n_workers' must be >= 0");
        spec.n_workers = static_cast<int>(w);
      }
    }
    if (spec.mode == RunMode::exact) {
      spec.epsilon_tail = get_real("epsilon_tail", 1e-8);
      if (!(spec.epsilon_tail > 0.0) || !(spec.epsilon_tail < 1.0)) {
        throw ConfigError("config: 'epsilon_tail' must be in (0, 1)");
      }
      if (raw.count("max_sector") != 0) {
        const std::int64_t m = parse_int("max_sector", raw["max_sector"]);
        if (m < 0 || m > 1000) {
          throw ConfigError("config: 'max_sector' must be in [0, 1000]");
        }
        spec.max_sector = static_cast<int>(m);
      }
    }
  }

  if (raw.count("format") != 0) {
    const std::string& f = raw["format"].text;
    if (f == "csv") spec.format = OutputFormat::csv;
    else if (f == "json") spec.format = OutputFormat::json;
    else {
      throw ConfigError("config line " + std::to_string(raw["format"].line) +
                        ": format must be 'csv' or 'json'");
    }
  }
  if (raw.count("output") != 0) spec.output = raw["output"].text;

  return spec;
}

}  // namespace superchem
