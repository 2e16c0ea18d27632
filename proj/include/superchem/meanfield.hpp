#pragma once

#include <cmath>
#include <vector>

#include "superchem/model.hpp"
#include "superchem/rk4.hpp"

namespace superchem {

/// Deterministic (noiseless) time derivative of the six amplitudes, in
/// scaled units.  The same drift feeds the stochastic stepper, so the
/// noiseless limit of the stochastic scheme is exactly this flow.
///
/// d a1 /dtau = -iG a2  - 2i La a1p a1^2
/// d a1p/dtau = +iG a2p + 2i La a1  a1p^2
/// d a2 /dtau = -iG a1  - 2i a2p b  - 2i La a2^2 a2p
/// d a2p/dtau = +iG a1p + 2i a2  bp + 2i La a2p^2 a2
/// d b  /dtau = (+i delta - Gamma/2) b  - i a2^2  - 2i Lb bp b^2
/// d bp /dtau = (-i delta - Gamma/2) bp + i a2p^2 + 2i Lb b  bp^2
///
/// The sign of the delta/Gamma extension is fixed by the -delta b+ b term
/// of the Hamiltonian: the molecular phase rotates as e^{+i delta tau} and
/// decays as e^{-Gamma tau / 2}.
inline ModeAmplitudes mf_drift(const ModeAmplitudes& s, const ModelParams& p,
                               const ModelTerms& terms = {}) {
  if (!s.finite()) {
    throw DivergenceError("mf_drift: non-finite amplitudes");
  }
  constexpr cplx i{0.0, 1.0};
  const double la = terms.collisions ? p.lambda_a : 0.0;
  const double lb = terms.collisions ? p.lambda_b : 0.0;
  const double g = terms.rf ? p.g_rf : 0.0;
  const double pa = terms.pa ? 1.0 : 0.0;  // PA strength is the unit rate
  const cplx rot = terms.detuning_decay
                       ? cplx{-0.5 * p.gamma_decay, p.delta}
                       : cplx{0.0, 0.0};  // (+i delta - Gamma/2)

  ModeAmplitudes d;
  d.a1 = -i * g * s.a2 - 2.0 * i * la * s.a1p * s.a1 * s.a1;
  d.a1p = i * g * s.a2p + 2.0 * i * la * s.a1 * s.a1p * s.a1p;
  d.a2 = -i * g * s.a1 - 2.0 * i * pa * s.a2p * s.b -
         2.0 * i * la * s.a2 * s.a2 * s.a2p;
  d.a2p = i * g * s.a1p + 2.0 * i * pa * s.a2 * s.bp +
          2.0 * i * la * s.a2p * s.a2p * s.a2;
  d.b = rot * s.b - i * pa * s.a2 * s.a2 - 2.0 * i * lb * s.bp * s.b * s.b;
  d.bp = std::conj(rot) * s.bp + i * pa * s.a2p * s.a2p +
         2.0 * i * lb * s.b * s.bp * s.bp;
  return d;
}

/// Default divergence guard: amplitudes are trusted up to
/// guard_factor * sqrt(total initial particle number), floored at
/// guard_factor for near-vacuum starts.
inline double default_guard(const ModeAmplitudes& init,
                            double guard_factor = 1e6) {
  const ObservableSample o = observables(init, 0.0);
  return guard_factor * std::max(1.0, std::sqrt(std::max(0.0, o.n_total)));
}

struct IntegrateOptions {
  double guard = 0.0;  ///< absolute amplitude bound; 0 = default_guard(init)
  double guard_factor = 1e6;
  ModelTerms terms{};
  bool record_states = false;
};

/// Deterministic trajectory: observable samples in strictly increasing tau,
/// with the first sample at tau = 0; raw states are kept when requested.
struct MfTrajectory {
  std::vector<ObservableSample> samples;
  std::vector<ModeAmplitudes> raw_states;
  ModeAmplitudes final_state;
};

/// Fixed-step RK4 integration of the noiseless flow.  Bit-reproducible for
/// identical inputs.  Throws DivergenceError (with the failure time) when
/// an amplitude leaves the guard region.
inline MfTrajectory integrate_mf(const ModeAmplitudes& init,
                                 const ModelParams& params,
                                 const TimeGrid& grid,
                                 const IntegrateOptions& opts = {}) {
  params.validate();
  grid.validate();
  if (!init.finite()) {
    throw DivergenceError("integrate_mf: non-finite initial state", 0.0);
  }
  const double guard =
      opts.guard > 0.0 ? opts.guard : default_guard(init, opts.guard_factor);
  const double guard2 = guard * guard;
  const std::int64_t n = grid.n_steps();
  const double dt = grid.dt;

  MfTrajectory out;
  out.samples.reserve(static_cast<std::size_t>(n / grid.sample_stride) + 2);
  ModeAmplitudes y = init;
  auto record = [&](std::int64_t k) {
    out.samples.push_back(observables(y, static_cast<double>(k) * dt));
    if (opts.record_states) out.raw_states.push_back(y);
  };
  record(0);
  const auto drift = [&](const ModeAmplitudes& s) {
    return mf_drift(s, params, opts.terms);
  };
  for (std::int64_t k = 1; k <= n; ++k) {
    y = rk4_step(y, dt, drift);
    if (!y.finite() || y.max_abs2() > guard2) {
      throw DivergenceError("integrate_mf: amplitude guard exceeded",
                            static_cast<double>(k) * dt);
    }
    if (k % grid.sample_stride == 0 || k == n) record(k);
  }
  out.final_state = y;
  return out;
}

/// Two-mode Rabi transfer reference: the exact solution of the linear
/// rf-only system, n1 = n0 cos^2(g tau), n2 = n0 sin^2(g tau).
inline std::pair<double, double> rabi_reference(double n0, double g,
                                                double tau) {
  const double c = std::cos(g * tau);
  const double s = std::sin(g * tau);
  return {n0 * c * c, n0 * s * s};
}

}  // namespace superchem
