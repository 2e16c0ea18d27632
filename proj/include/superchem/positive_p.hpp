#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "superchem/meanfield.hpp"
#include "superchem/model.hpp"
#include "superchem/rng.hpp"

namespace superchem {

/// Wiener increments for one step: six independent real Gaussians already
/// scaled to variance dt (eta_i * sqrt(dt)).
struct NoiseIncrement {
  std::array<double, 6> eta{};
};

namespace detail {

/// Principal-branch complex square root (Re >= 0), the stable two-sqrt
/// construction.  Amplitudes here sit far from the overflow range, so the
/// plain |z| evaluation is safe, and this is several times cheaper than
/// std::sqrt on a std::complex.
inline cplx principal_sqrt(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  if (x == 0.0 && y == 0.0) return {};
  const double r = std::sqrt(x * x + y * y);
  const double t = std::sqrt(0.5 * (r + std::abs(x)));
  if (x >= 0.0) return {t, y / (2.0 * t)};
  return {std::abs(y) / (2.0 * t), std::copysign(t, y)};
}

}  // namespace detail

/// Diffusion amplitudes of the Ito equations, one per phase-space variable
/// (the noises are mutually independent; there is no cross-channel
/// diffusion).  Principal complex square roots: the branch sign is absorbed
/// by the sign-symmetric Gaussian noise.
inline std::array<cplx, 6> noise_amplitudes(const ModeAmplitudes& s,
                                            const ModelParams& p) {
  constexpr cplx i{0.0, 1.0};
  const double la = p.lambda_a;
  const double lb = p.lambda_b;
  return {
      detail::principal_sqrt(-2.0 * i * la * s.a1 * s.a1),
      detail::principal_sqrt(2.0 * i * la * s.a1p * s.a1p),
      detail::principal_sqrt(-2.0 * i * s.b - 2.0 * i * la * s.a2 * s.a2),
      detail::principal_sqrt(2.0 * i * s.bp + 2.0 * i * la * s.a2p * s.a2p),
      detail::principal_sqrt(-2.0 * i * lb * s.b * s.b),
      detail::principal_sqrt(2.0 * i * lb * s.bp * s.bp),
  };
}

/// One Euler-Maruyama step: state + drift * dt + s_k eta_k componentwise.
/// The drift is mf_drift itself, so zero noise reproduces one explicit
/// Euler step of the mean-field flow exactly.
inline ModeAmplitudes pp_step(const ModeAmplitudes& s, const ModelParams& p,
                              double dt, const NoiseIncrement& noise) {
  const ModeAmplitudes d = mf_drift(s, p);
  const std::array<cplx, 6> amp = noise_amplitudes(s, p);
  ModeAmplitudes out;
  out.a1 = s.a1 + d.a1 * dt + amp[0] * noise.eta[0];
  out.a1p = s.a1p + d.a1p * dt + amp[1] * noise.eta[1];
  out.a2 = s.a2 + d.a2 * dt + amp[2] * noise.eta[2];
  out.a2p = s.a2p + d.a2p * dt + amp[3] * noise.eta[3];
  out.b = s.b + d.b * dt + amp[4] * noise.eta[4];
  out.bp = s.bp + d.bp * dt + amp[5] * noise.eta[5];
  return out;
}

struct TrajectoryOptions {
  double guard = 0.0;  ///< absolute amplitude bound; 0 = default_guard(init)
  double guard_factor = 1e6;
  bool record_states = false;
};

/// Moments of one stochastic trajectory at the grid's sample points.
/// A diverged trajectory keeps the samples recorded before failure and
/// nothing afterwards.
struct TrajectoryResult {
  /// Per sample: n1, n2, nb, n_total, g2_b_num (complex-product reals).
  std::vector<std::array<double, 5>> moments;
  std::vector<double> taus;
  std::vector<ModeAmplitudes> states;  ///< filled when record_states
  bool diverged = false;
  double divergence_tau = -1.0;
};

/// Integrate one trajectory with the counter-based noise stream keyed by
/// `seed`.  Identical (inputs, seed) give bit-identical results.
inline TrajectoryResult run_trajectory(const ModeAmplitudes& init,
                                       const ModelParams& params,
                                       const TimeGrid& grid,
                                       std::uint64_t seed,
                                       const TrajectoryOptions& opts = {}) {
  params.validate();
  grid.validate();
  const double guard =
      opts.guard > 0.0 ? opts.guard : default_guard(init, opts.guard_factor);
  const double guard2 = guard * guard;
  const std::int64_t n = grid.n_steps();
  const double dt = grid.dt;
  const double sq_dt = std::sqrt(dt);

  TrajectoryResult out;
  out.moments.reserve(static_cast<std::size_t>(n / grid.sample_stride) + 2);
  ModeAmplitudes y = init;
  auto record = [&](std::int64_t k) {
    const ObservableSample o = observables(y, static_cast<double>(k) * dt);
    out.moments.push_back({o.n1, o.n2, o.nb, o.n_total, o.g2_b_num});
    out.taus.push_back(o.tau);
    if (opts.record_states) out.states.push_back(y);
  };
  record(0);
  NoiseIncrement noise;
  for (std::int64_t k = 0; k < n; ++k) {
    const auto z = rng::step_normals(seed, static_cast<std::uint64_t>(k));
    for (int j = 0; j < 6; ++j) noise.eta[j] = z[j] * sq_dt;
    y = pp_step(y, params, dt, noise);
    if (!y.finite() || y.max_abs2() > guard2) {
      out.diverged = true;
      out.divergence_tau = static_cast<double>(k + 1) * dt;
      return out;
    }
    if ((k + 1) % grid.sample_stride == 0 || k + 1 == n) record(k + 1);
  }
  return out;
}

/// Ensemble means with standard errors at one sample point.  n_surviving
/// counts the trajectories still alive (not yet diverged) at this time.
struct SampleStats {
  double tau = 0.0;
  std::array<double, 5> mean{};  ///< n1, n2, nb, n_total, g2_b_num
  std::array<double, 5> se{};    ///< sample std dev / sqrt(n_surviving)
  std::int64_t n_surviving = 0;
};

struct EnsembleStats {
  std::vector<SampleStats> samples;
  std::int64_t n_trajectories = 0;
  std::int64_t n_diverged = 0;
  std::uint64_t master_seed = 0;
  bool unreliable = false;  ///< set when > 1% of trajectories diverged
};

struct EnsembleOptions {
  double guard = 0.0;
  double guard_factor = 1e6;
};

namespace detail {

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stderr_of_mean() const {
    if (n < 2) return 0.0;
    const double var = m2 / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace detail

/// Run n_traj independent trajectories (trajectory k is keyed by
/// hash(master_seed, k)) and aggregate streaming means/variances per sample
/// point.  Workers only affect scheduling: trajectories are computed into
/// per-index slots in fixed-size chunks and merged in index order, so the
/// result is bit-identical for any n_workers.
inline EnsembleStats simulate_ensemble(const ModeAmplitudes& init,
                                       const ModelParams& params,
                                       const TimeGrid& grid,
                                       std::int64_t n_traj,
                                       std::uint64_t master_seed,
                                       int n_workers,
                                       const EnsembleOptions& opts = {}) {
  params.validate();
  grid.validate();
  if (n_traj < 2) {
    throw ParameterError("simulate_ensemble: n_traj must be >= 2");
  }
  int workers = n_workers;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }

  TrajectoryOptions topts;
  topts.guard = opts.guard;
  topts.guard_factor = opts.guard_factor;

  const std::size_t n_samples = grid.sample_steps().size();
  std::vector<std::array<detail::Welford, 5>> acc(n_samples);
  std::int64_t n_diverged = 0;

  constexpr std::int64_t kChunk = 64;  // fixed; independent of worker count
  std::vector<TrajectoryResult> slots;
  for (std::int64_t base = 0; base < n_traj; base += kChunk) {
    const std::int64_t count = std::min(kChunk, n_traj - base);
    slots.assign(static_cast<std::size_t>(count), TrajectoryResult{});
    auto work = [&](std::int64_t first, std::int64_t stride) {
      for (std::int64_t i = first; i < count; i += stride) {
        const std::uint64_t seed = rng::hash_seed(
            master_seed, static_cast<std::uint64_t>(base + i));
        slots[static_cast<std::size_t>(i)] =
            run_trajectory(init, params, grid, seed, topts);
      }
    };
    const int nw = static_cast<int>(
        std::min<std::int64_t>(workers, count));
    if (nw <= 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(nw));
      for (int w = 0; w < nw; ++w) pool.emplace_back(work, w, nw);
      for (auto& t : pool) t.join();
    }
    // merge in trajectory-index order (determinism contract)
    for (const TrajectoryResult& r : slots) {
      if (r.diverged) ++n_diverged;
      for (std::size_t j = 0; j < r.moments.size(); ++j) {
        for (int o = 0; o < 5; ++o) acc[j][o].add(r.moments[j][o]);
      }
    }
  }

  if (n_diverged == n_traj) {
    throw DivergenceError("simulate_ensemble: every trajectory diverged");
  }

  EnsembleStats stats;
  stats.n_trajectories = n_traj;
  stats.n_diverged = n_diverged;
  stats.master_seed = master_seed;
  stats.unreliable = (n_diverged * 100 > n_traj);
  const auto steps = grid.sample_steps();
  for (std::size_t j = 0; j < n_samples; ++j) {
    if (acc[j][0].n == 0) break;  // no survivors from here on
    SampleStats s;
    s.tau = static_cast<double>(steps[j]) * grid.dt;
    for (int o = 0; o < 5; ++o) {
      s.mean[o] = acc[j][o].mean;
      s.se[o] = acc[j][o].stderr_of_mean();
    }
    s.n_surviving = acc[j][0].n;
    stats.samples.push_back(s);
  }
  return stats;
}

}  // namespace superchem
