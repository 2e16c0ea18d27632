#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "superchem/config.hpp"
#include "superchem/fock.hpp"
#include "superchem/meanfield.hpp"
#include "superchem/positive_p.hpp"
#include "superchem/raman.hpp"
#include "superchem/series.hpp"

namespace superchem {

struct RunOutputs {
  std::vector<std::string> files;
  std::string summary;
};

namespace detail {

inline std::string default_output(const RunSpec& spec) {
  return std::string(to_string(spec.mode)) + "_out." +
         to_string(spec.format);
}

/// "path/name.ext" -> "path/name<suffix>.ext" (suffix appended when no
/// extension).
inline std::string with_suffix(const std::string& path,
                               const std::string& suffix) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

inline void write_series(const RunSpec& spec, const std::string& path,
                         const Series& series) {
  if (spec.format == OutputFormat::csv) {
    write_series_csv(path, series);
  } else {
    write_series_json(path, series);
  }
}

inline const std::vector<std::string>& base_columns() {
  static const std::vector<std::string> cols = {"tau",     "n1", "n2", "nb",
                                                "n_total", "g2_b_num"};
  return cols;
}

inline const std::vector<std::string>& pp_columns() {
  static const std::vector<std::string> cols = {
      "tau",       "n1",        "n2",        "nb",        "n_total",
      "g2_b_num",  "stderr_n1", "stderr_n2", "stderr_nb", "stderr_n_total",
      "stderr_g2_b_num"};
  return cols;
}

inline Series mf_series(const RunSpec& spec, const MfTrajectory& traj) {
  Series s;
  s.meta = echo_spec(spec);
  s.columns = base_columns();
  s.rows.reserve(traj.samples.size());
  for (const ObservableSample& o : traj.samples) {
    s.rows.push_back({o.tau, o.n1, o.n2, o.nb, o.n_total, o.g2_b_num});
  }
  return s;
}

inline Series pp_series(const RunSpec& spec, const EnsembleStats& stats) {
  Series s;
  s.meta = echo_spec(spec);
  s.meta.add("n_diverged", static_cast<std::int64_t>(stats.n_diverged));
  s.meta.add("unreliable",
             static_cast<std::int64_t>(stats.unreliable ? 1 : 0));
  s.columns = pp_columns();
  s.rows.reserve(stats.samples.size());
  for (const SampleStats& q : stats.samples) {
    s.rows.push_back({q.tau, q.mean[0], q.mean[1], q.mean[2], q.mean[3],
                      q.mean[4], q.se[0], q.se[1], q.se[2], q.se[3],
                      q.se[4]});
  }
  return s;
}

inline MfTrajectory run_mf(const RunSpec& spec) {
  IntegrateOptions opts;
  opts.guard_factor = spec.guard_factor;
  return integrate_mf(initial_state(spec.n0), spec.params, spec.grid, opts);
}

inline EnsembleStats run_pp(const RunSpec& spec) {
  if (!spec.master_seed_set) {
    throw ConfigError("pp run: master_seed was never provided");
  }
  EnsembleOptions opts;
  opts.guard_factor = spec.guard_factor;
  return simulate_ensemble(initial_state(spec.n0), spec.params, spec.grid,
                           spec.n_traj, spec.master_seed, spec.n_workers,
                           opts);
}

}  // namespace detail

/// Execute a validated RunSpec and write its artifacts.  Identical specs
/// (including seed) produce byte-identical files regardless of worker
/// count.
inline RunOutputs run(const RunSpec& spec) {
  using namespace detail;
  RunOutputs out;
  const std::string output =
      spec.output.empty() ? default_output(spec) : spec.output;

  switch (spec.mode) {
    case RunMode::mf: {
      const MfTrajectory traj = run_mf(spec);
      write_series(spec, output, mf_series(spec, traj));
      out.files.push_back(output);
      out.summary = "mf: " + std::to_string(traj.samples.size()) +
                    " samples -> " + output;
      break;
    }
    case RunMode::pp: {
      const EnsembleStats stats = run_pp(spec);
      write_series(spec, output, pp_series(spec, stats));
      out.files.push_back(output);
      out.summary = "pp: " + std::to_string(stats.samples.size()) +
                    " samples, " + std::to_string(stats.n_diverged) + "/" +
                    std::to_string(stats.n_trajectories) +
                    " trajectories diverged" +
                    (stats.unreliable ? " [UNRELIABLE]" : "") + " -> " +
                    output;
      break;
    }
    case RunMode::exact: {
      const CoherentEvolveResult res = evolve_coherent(
          spec.params, spec.n0, spec.epsilon_tail, spec.grid,
          spec.max_sector);
      Series s;
      s.meta = echo_spec(spec);
      s.meta.add("n_max_sector", static_cast<std::int64_t>(res.n_max));
      s.meta.add("dropped_mass", res.dropped_mass);
      s.columns = base_columns();
      for (const ObservableSample& o : res.samples) {
        s.rows.push_back({o.tau, o.n1, o.n2, o.nb, o.n_total, o.g2_b_num});
      }
      write_series(spec, output, s);
      out.files.push_back(output);
      out.summary = "exact: sectors up to " + std::to_string(res.n_max) +
                    ", dropped mass " + format_double(res.dropped_mass) +
                    " -> " + output;
      break;
    }
    case RunMode::compare: {
      const MfTrajectory traj = run_mf(spec);
      const EnsembleStats stats = run_pp(spec);
      const std::string mf_path = with_suffix(output, "_mf");
      const std::string pp_path = with_suffix(output, "_pp");
      write_series(spec, mf_path, mf_series(spec, traj));
      write_series(spec, pp_path, pp_series(spec, stats));
      out.files.push_back(mf_path);
      out.files.push_back(pp_path);

      // pointwise |nb_pp - nb_mf| in units of the pp standard error; the
      // grids are identical by construction, so no interpolation happens
      double max_ratio = 0.0, max_abs = 0.0, tau_at_max = 0.0;
      bool unbounded = false;
      const std::size_t n =
          std::min(stats.samples.size(), traj.samples.size());
      for (std::size_t j = 0; j < n; ++j) {
        const double d =
            std::abs(stats.samples[j].mean[2] - traj.samples[j].nb);
        const double se = stats.samples[j].se[2];
        max_abs = std::max(max_abs, d);
        double ratio;
        if (d == 0.0) {
          ratio = 0.0;
        } else if (se == 0.0) {
          ratio = std::numeric_limits<double>::infinity();
          unbounded = true;
        } else {
          ratio = d / se;
        }
        if (ratio > max_ratio) {
          max_ratio = ratio;
          tau_at_max = stats.samples[j].tau;
        }
      }
      nlohmann::ordered_json diff;
      nlohmann::ordered_json meta = nlohmann::ordered_json::object();
      for (const auto& [k, v] : echo_spec(spec).entries) meta[k] = v;
      diff["metadata"] = meta;
      diff["n_compared_samples"] = n;
      diff["n_diverged"] = stats.n_diverged;
      diff["max_abs_delta_nb"] = max_abs;
      diff["max_delta_nb_over_stderr"] =
          unbounded ? "inf" : format_double(max_ratio);
      diff["tau_at_max"] = tau_at_max;
      const std::string diff_path = with_suffix(output, "_diff");
      std::ofstream df(diff_path, std::ios::binary);
      if (!df) throw IoError("cannot open for writing: " + diff_path);
      df << diff.dump(1) << "\n";
      out.files.push_back(diff_path);
      out.summary = "compare: max |dnb| = " + format_double(max_abs) +
                    " (" +
                    (unbounded ? std::string("inf")
                               : format_double(max_ratio)) +
                    " stderr units at tau = " + format_double(tau_at_max) +
                    ")";
      break;
    }
    case RunMode::reduce: {
      const RamanReduction red = reduce(spec.raman);
      std::string text;
      text += "chi           = " + format_double(red.report.chi) + "\n";
      text += "lambda_a_eff  = " + format_double(red.report.lambda_a_eff) +
              "\n";
      text += "lambda_b_eff  = " + format_double(red.report.lambda_b_eff) +
              "\n";
      text += "eta           = " + format_double(red.report.eta) + "\n";
      if (spec.raman.g_rf != 0.0) {
        text += "g_scaled      = " + format_double(red.report.g_scaled) +
                "\n";
      }
      text += "valid_elimination = ";
      text += red.report.valid_elimination ? "yes" : "no";
      text += "\nrf_ceiling_flagged = ";
      text += red.report.rf_ceiling_flagged ? "yes" : "no";
      text += "\n";
      if (!red.report.warning.empty()) {
        text += "warning: " + red.report.warning + "\n";
      }
      if (!spec.output.empty()) {
        nlohmann::ordered_json j;
        nlohmann::ordered_json meta = nlohmann::ordered_json::object();
        for (const auto& [k, v] : echo_spec(spec).entries) meta[k] = v;
        j["metadata"] = meta;
        j["chi"] = red.report.chi;
        j["lambda_a_eff"] = red.report.lambda_a_eff;
        j["lambda_b_eff"] = red.report.lambda_b_eff;
        j["eta"] = red.report.eta;
        j["g_scaled"] = red.report.g_scaled;
        j["ratio_omega"] = red.report.ratio_omega;
        j["ratio_gamma"] = red.report.ratio_gamma;
        j["valid_elimination"] = red.report.valid_elimination;
        j["rf_ceiling_flagged"] = red.report.rf_ceiling_flagged;
        j["warning"] = red.report.warning;
        std::ofstream jf(spec.output, std::ios::binary);
        if (!jf) throw IoError("cannot open for writing: " + spec.output);
        jf << j.dump(1) << "\n";
        out.files.push_back(spec.output);
      }
      out.summary = text;
      break;
    }
  }
  return out;
}

}  // namespace superchem
