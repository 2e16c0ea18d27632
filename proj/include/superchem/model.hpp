#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "superchem/errors.hpp"

namespace superchem {

using cplx = std::complex<double>;

/// Model constants in scaled units.  Every rate is divided by the PA
/// strength gamma and time is the dimensionless tau = gamma * t; the PA
/// coupling itself is therefore fixed at 1 inside the dynamics.  gamma_pa
/// keeps the physical value (rad/s) only for converting tau to seconds.
struct ModelParams {
  double g_rf = 0.0;         ///< scaled rf coupling G = G'/gamma
  double gamma_pa = 1.0;     ///< PA strength gamma in rad/s (the time unit)
  double delta = 0.0;        ///< optical detuning, scaled
  double gamma_decay = 0.0;  ///< molecular decay rate, scaled, non-negative
  double lambda_a = 0.0;     ///< atomic collision strength, scaled
  double lambda_b = 0.0;     ///< molecular collision strength, scaled

  void validate() const {
    if (!(gamma_pa > 0.0) || !std::isfinite(gamma_pa)) {
      throw ParameterError("gamma_pa must be positive and finite");
    }
    if (!(gamma_decay >= 0.0) || !std::isfinite(gamma_decay)) {
      throw ParameterError("gamma_decay must be non-negative and finite");
    }
    for (double v : {g_rf, delta, lambda_a, lambda_b}) {
      if (!std::isfinite(v)) {
        throw ParameterError("model parameters must be finite");
      }
    }
  }
};

/// Raw (unscaled) rates in one consistent angular-frequency unit.
struct PhysicalParams {
  double g_rf_hz = 0.0;
  double gamma_pa_hz = 0.0;
  double delta_hz = 0.0;
  double gamma_decay_hz = 0.0;
  double lambda_a_hz = 0.0;
  double lambda_b_hz = 0.0;
};

/// Divide every rate by the PA strength.  The returned ModelParams keeps
/// gamma_pa so tau can be mapped back to seconds.
inline ModelParams scale_physical(const PhysicalParams& p) {
  if (!(p.gamma_pa_hz > 0.0) || !std::isfinite(p.gamma_pa_hz)) {
    throw ParameterError("scale_physical: gamma_pa must be > 0");
  }
  ModelParams m;
  m.g_rf = p.g_rf_hz / p.gamma_pa_hz;
  m.gamma_pa = p.gamma_pa_hz;
  m.delta = p.delta_hz / p.gamma_pa_hz;
  m.gamma_decay = p.gamma_decay_hz / p.gamma_pa_hz;
  m.lambda_a = p.lambda_a_hz / p.gamma_pa_hz;
  m.lambda_b = p.lambda_b_hz / p.gamma_pa_hz;
  m.validate();
  return m;
}

inline double tau_to_seconds(double tau, const ModelParams& p) {
  return tau / p.gamma_pa;
}

inline double seconds_to_tau(double t, const ModelParams& p) {
  return t * p.gamma_pa;
}

/// Term switches shared by the drift and the number-basis Hamiltonian.
/// All on by default; tests use them to isolate parts of the model (the
/// PA coupling is the unit rate in scaled form, so a switch is the only
/// way to remove it).
struct ModelTerms {
  bool rf = true;
  bool pa = true;
  bool collisions = true;
  bool detuning_decay = true;
};

/// The six independent phase-space amplitudes.  a1p/a2p/bp are NOT the
/// complex conjugates of a1/a2/b on an individual stochastic trajectory;
/// conjugacy holds only for ensemble means (and along noiseless flows
/// started on the conjugate manifold).
struct ModeAmplitudes {
  cplx a1{}, a1p{}, a2{}, a2p{}, b{}, bp{};

  bool finite() const {
    for (const cplx* z : {&a1, &a1p, &a2, &a2p, &b, &bp}) {
      if (!std::isfinite(z->real()) || !std::isfinite(z->imag())) return false;
    }
    return true;
  }

  /// Largest squared magnitude over the six amplitudes (guard checks).
  double max_abs2() const {
    double m = 0.0;
    for (const cplx* z : {&a1, &a1p, &a2, &a2p, &b, &bp}) {
      m = std::max(m, std::norm(*z));
    }
    return m;
  }
};

inline ModeAmplitudes operator+(const ModeAmplitudes& x,
                                const ModeAmplitudes& y) {
  return {x.a1 + y.a1, x.a1p + y.a1p, x.a2 + y.a2,
          x.a2p + y.a2p, x.b + y.b, x.bp + y.bp};
}

inline ModeAmplitudes operator*(const ModeAmplitudes& x, double s) {
  return {x.a1 * s, x.a1p * s, x.a2 * s, x.a2p * s, x.b * s, x.bp * s};
}

/// Mode populations and the molecular second moment at one time point.
struct ObservableSample {
  double tau = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double nb = 0.0;
  double n_total = 0.0;   ///< n1 + n2 + 2 nb, conserved when gamma_decay = 0
  double g2_b_num = 0.0;  ///< Re(bp^2 b^2), the unnormalized <b+ b+ b b>
};

/// Moments of one phase-space point.  For a conjugate-manifold state
/// (a1p = conj(a1), ...) the populations reduce to |a|^2.
inline ObservableSample observables(const ModeAmplitudes& s, double tau) {
  if (!s.finite()) {
    throw DivergenceError("observables: non-finite amplitudes", tau);
  }
  ObservableSample o;
  o.tau = tau;
  o.n1 = (s.a1p * s.a1).real();
  o.n2 = (s.a2p * s.a2).real();
  o.nb = (s.bp * s.b).real();
  o.n_total = o.n1 + o.n2 + 2.0 * o.nb;
  o.g2_b_num = (s.bp * s.bp * s.b * s.b).real();
  return o;
}

/// Coherent-state start: mode 1 holds mean n0 atoms, modes 2 and b are
/// vacuum.  Coherent and vacuum states are point distributions in this
/// representation, so the result is deterministic; the phase is fixed to
/// the positive real branch.
inline ModeAmplitudes initial_state(double n0) {
  if (!std::isfinite(n0) || n0 < 0.0) {
    throw ParameterError("initial_state: n0 must be finite and >= 0");
  }
  ModeAmplitudes s;
  s.a1 = s.a1p = std::sqrt(n0);
  return s;
}

/// Uniform integration grid over [0, tau_end] with recording every
/// sample_stride steps (the final step is always recorded).
struct TimeGrid {
  double tau_end = 0.0;
  double dt = 0.0;
  std::int64_t sample_stride = 10;

  void validate() const {
    if (!(tau_end > 0.0) || !std::isfinite(tau_end) || !(dt > 0.0) ||
        !std::isfinite(dt)) {
      throw ParameterError("time grid: tau_end and dt must be positive");
    }
    const double ratio = tau_end / dt;
    if (ratio < 1.0 - 1e-9) {
      throw ParameterError("time grid: tau_end/dt must be >= 1");
    }
    if (ratio > 9.0e15) {
      throw ParameterError("time grid: step count does not fit an integer");
    }
    if (sample_stride < 1) {
      throw ParameterError("time grid: sample_stride must be >= 1");
    }
  }

  std::int64_t n_steps() const {
    return std::max<std::int64_t>(1, std::llround(tau_end / dt));
  }

  /// Indices of the recorded steps: 0, stride, 2*stride, ..., n_steps.
  std::vector<std::int64_t> sample_steps() const {
    std::vector<std::int64_t> out;
    const std::int64_t n = n_steps();
    out.reserve(static_cast<std::size_t>(n / sample_stride) + 2);
    for (std::int64_t k = 0; k < n; k += sample_stride) out.push_back(k);
    out.push_back(n);
    return out;
  }
};

}  // namespace superchem
