#pragma once

#include <cmath>
#include <string>

#include "superchem/model.hpp"

namespace superchem {

/// rf ceiling above which the output coupler shuts down (density
/// fluctuations and loss to untrapped states): 4 sqrt(6) kHz.
inline const double kRfShutdownCeilingHz = 4.0 * std::sqrt(6.0) * 1e3;

/// Two-color (Raman) configuration before eliminating the excited
/// molecular mode.  All rates share one angular-frequency convention; the
/// module performs no 2*pi conversion (the combination chi = gamma Omega /
/// delta is convention-free).
struct RamanParams {
  double gamma_pa = 0.0;  ///< free-bound PA strength
  double omega = 0.0;     ///< bound-bound coupling to the stable mode
  double delta = 0.0;     ///< intermediate detuning; |delta| must dominate
  double lambda_a = 0.0;  ///< atomic collision strength
  double lambda_g = 0.0;  ///< stable-molecule collision strength
  double g_rf = 0.0;      ///< rf coupling (optional; used by the ceiling check)

  void validate() const {
    for (double v : {gamma_pa, omega, delta, lambda_a, lambda_g, g_rf}) {
      if (!std::isfinite(v)) {
        throw ParameterError("raman parameters must be finite");
      }
    }
    if (delta == 0.0) {
      throw ParameterError("raman reduction: delta must be nonzero");
    }
    if (!(gamma_pa > 0.0)) {
      throw ParameterError("raman reduction: gamma_pa must be > 0");
    }
  }
};

struct RamanReport {
  double chi = 0.0;           ///< effective PA strength gamma Omega / delta
  double lambda_a_eff = 0.0;  ///< lambda_a + gamma^2 / delta
  double lambda_b_eff = 0.0;  ///< lambda_g, unchanged
  double eta = 0.0;           ///< delta / Omega (so G = eta G' / gamma)
  double g_scaled = 0.0;      ///< eta g_rf / gamma_pa (0 when g_rf absent)
  double ratio_omega = 0.0;   ///< |Omega / delta|, must be < 1 for validity
  double ratio_gamma = 0.0;   ///< |gamma / delta|, must be < 1 for validity
  bool valid_elimination = true;
  bool rf_ceiling_flagged = false;
  std::string warning;
};

struct RamanReduction {
  PhysicalParams effective;  ///< feeds scale_physical unchanged
  RamanReport report;
};

/// Adiabatic elimination of the excited molecular mode: with the excited
/// amplitude slaved to (Omega g + gamma a2^2) / delta the model keeps its
/// three-mode form with
///   gamma -> chi = gamma Omega / delta,
///   lambda_a -> lambda_a + gamma^2 / delta,
///   lambda_b -> lambda_g,   G' unchanged.
/// Validity (|delta| dominant) failures produce a warning, not an error.
inline RamanReduction reduce(const RamanParams& r) {
  r.validate();
  RamanReduction out;
  RamanReport& rep = out.report;
  rep.chi = r.gamma_pa * r.omega / r.delta;
  rep.lambda_a_eff = r.lambda_a + r.gamma_pa * r.gamma_pa / r.delta;
  rep.lambda_b_eff = r.lambda_g;
  rep.eta = r.omega != 0.0 ? r.delta / r.omega : 0.0;
  rep.ratio_omega = std::abs(r.omega / r.delta);
  rep.ratio_gamma = std::abs(r.gamma_pa / r.delta);
  if (rep.ratio_omega >= 1.0 || rep.ratio_gamma >= 1.0) {
    rep.valid_elimination = false;
    rep.warning =
        "adiabatic elimination marginal: |delta| is not the largest "
        "frequency";
  }
  if (r.g_rf != 0.0) {
    rep.g_scaled = rep.eta * r.g_rf / r.gamma_pa;
    if (r.g_rf >= kRfShutdownCeilingHz) {
      rep.rf_ceiling_flagged = true;
      if (!rep.warning.empty()) rep.warning += "; ";
      rep.warning +=
          "g_rf at or above the output-shutdown ceiling 4*sqrt(6) kHz";
    }
  }
  out.effective.g_rf_hz = r.g_rf;
  out.effective.gamma_pa_hz = rep.chi;
  out.effective.delta_hz = 0.0;
  out.effective.gamma_decay_hz = 0.0;
  out.effective.lambda_a_hz = rep.lambda_a_eff;
  out.effective.lambda_b_hz = rep.lambda_b_eff;
  return out;
}

}  // namespace superchem
