#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "superchem/meanfield.hpp"
#include "superchem/positive_p.hpp"

using namespace superchem;

namespace {

ModelParams params_g(double g, double la = 0.0, double lb = 0.0) {
  ModelParams p;
  p.g_rf = g;
  p.lambda_a = la;
  p.lambda_b = lb;
  return p;
}

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

TEST_CASE("noise amplitudes at reference states", "[positive_p]") {
  SECTION("vacuum carries no noise") {
    const auto s = noise_amplitudes(ModeAmplitudes{}, params_g(3.0, 0.5, 0.5));
    for (const cplx& a : s) CHECK(a == cplx{});
  }
  SECTION("PA channel only") {
    // -2i b = -2i (i/2) = 1 and 2i bp = 2i (-i/2) = 1
    ModeAmplitudes st;
    st.b = {0.0, 0.5};
    st.bp = {0.0, -0.5};
    const auto s = noise_amplitudes(st, params_g(0.0));
    CHECK(s[2].real() == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(s[2].imag() == Catch::Approx(0.0).margin(1e-15));
    CHECK(s[3].real() == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(s[0] == cplx{});
    CHECK(s[1] == cplx{});
    CHECK(s[4] == cplx{});
    CHECK(s[5] == cplx{});
  }
  SECTION("principal branch of sqrt(-i)") {
    ModeAmplitudes st;
    st.a1 = 1.0;
    const auto s = noise_amplitudes(st, params_g(0.0, 0.5, 0.0));
    CHECK(s[0].real() == Catch::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(s[0].imag() == Catch::Approx(-kInvSqrt2).epsilon(1e-15));
  }
  SECTION("principal branch matches std::sqrt on random inputs") {
    ModeAmplitudes st;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int t = 0; t < 500; ++t) {
      st.a1 = {d(gen), d(gen)};
      st.b = {d(gen), d(gen)};
      st.a2 = {d(gen), d(gen)};
      const auto s = noise_amplitudes(st, params_g(1.0, 0.7, 0.3));
      const cplx ref1 = std::sqrt(cplx{0, -1.4} * st.a1 * st.a1);
      const cplx ref3 =
          std::sqrt(cplx{0, -2.0} * st.b + cplx{0, -1.4} * st.a2 * st.a2);
      CHECK(std::abs(s[0] - ref1) < 1e-14 * (1.0 + std::abs(ref1)));
      CHECK(std::abs(s[2] - ref3) < 1e-14 * (1.0 + std::abs(ref3)));
      CHECK(s[0].real() >= 0.0);
      CHECK(s[2].real() >= 0.0);
    }
  }
}

TEST_CASE("pp_step with zero noise is one explicit Euler step",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  ModeAmplitudes s = initial_state(10.0);
  s.a2 = {0.3, -0.1};
  s.b = {0.05, 0.2};
  s.bp = {0.04, -0.18};
  const double dt = 1e-3;
  const ModeAmplitudes stepped = pp_step(s, p, dt, NoiseIncrement{});
  const ModeAmplitudes d = mf_drift(s, p);
  const ModeAmplitudes euler = s + d * dt;
  CHECK(stepped.a1 == euler.a1);
  CHECK(stepped.a1p == euler.a1p);
  CHECK(stepped.a2 == euler.a2);
  CHECK(stepped.a2p == euler.a2p);
  CHECK(stepped.b == euler.b);
  CHECK(stepped.bp == euler.bp);
}

TEST_CASE("with no couplings the state is a fixed point of the stepper",
          "[positive_p]") {
  // G = 0 and lambda = 0, with modes 2 and b in vacuum: drift and all six
  // diffusion amplitudes vanish, so even finite noise leaves the state.
  const ModelParams p = params_g(0.0);
  const ModeAmplitudes s = initial_state(123.0);
  NoiseIncrement noise;
  noise.eta = {0.7, -0.3, 0.4, 1.2, -0.9, 0.1};
  const ModeAmplitudes stepped = pp_step(s, p, 0.01, noise);
  CHECK(stepped.a1 == s.a1);
  CHECK(stepped.a1p == s.a1p);
  CHECK(stepped.a2 == cplx{});
  CHECK(stepped.b == cplx{});
}

TEST_CASE("hand-evaluated single step", "[positive_p]") {
  // lambda = 0, G = 0, b = i/2, bp = -i/2, dt = 0.01, eta3 sqrt(dt) = 0.1:
  // a2 picks up (-2i a2p b) dt + 1 * 0.1 = 0.1 and nothing else moves
  // (a2 = 0, so the b drift -i a2^2 vanishes).
  const ModelParams p = params_g(0.0);
  ModeAmplitudes s;
  s.b = {0.0, 0.5};
  s.bp = {0.0, -0.5};
  NoiseIncrement noise;
  noise.eta[2] = 0.1;
  const ModeAmplitudes stepped = pp_step(s, p, 0.01, noise);
  CHECK(stepped.a2.real() == Catch::Approx(0.1).epsilon(1e-15));
  CHECK(stepped.a2.imag() == Catch::Approx(0.0).margin(1e-15));
  CHECK(stepped.a1 == cplx{});
  CHECK(stepped.a2p == cplx{});
  CHECK(stepped.b == s.b);
  CHECK(stepped.bp == s.bp);

  // independent scalar route: s3 = sqrt(-2i * i/2) = sqrt(1) = 1
  const double a2_expected = 0.0 + 0.0 * 0.01 + 1.0 * 0.1;
  CHECK(stepped.a2.real() == a2_expected);
}

TEST_CASE("run_trajectory is deterministic in the seed", "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  TimeGrid grid{0.1, 1e-3, 20};
  const auto a = run_trajectory(initial_state(10.0), p, grid, 987654321ull);
  const auto b = run_trajectory(initial_state(10.0), p, grid, 987654321ull);
  REQUIRE(a.moments.size() == b.moments.size());
  for (std::size_t j = 0; j < a.moments.size(); ++j) {
    CHECK(a.moments[j] == b.moments[j]);
  }
  const auto c = run_trajectory(initial_state(10.0), p, grid, 987654322ull);
  CHECK(a.moments.back() != c.moments.back());
}

TEST_CASE("uncoupled vacuum modes stay exactly constant", "[positive_p]") {
  const ModelParams p = params_g(0.0);
  TimeGrid grid{0.5, 1e-3, 100};
  const auto r = run_trajectory(initial_state(42.0), p, grid, 5);
  CHECK(!r.diverged);
  for (const auto& m : r.moments) {
    CHECK(m[0] == 42.0);  // n1
    CHECK(m[1] == 0.0);
    CHECK(m[2] == 0.0);
    CHECK(m[3] == 42.0);
  }
}

TEST_CASE("noiseless stepping converges to the RK4 flow at first order",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  const ModeAmplitudes init = initial_state(10.0);
  const double tau_end = 0.2;

  TimeGrid ref_grid{tau_end, 1e-6, 1 << 20};
  const double nb_ref =
      integrate_mf(init, p, ref_grid).samples.back().nb;

  auto euler_nb = [&](double dt) {
    ModeAmplitudes y = init;
    const auto n = static_cast<std::int64_t>(std::llround(tau_end / dt));
    for (std::int64_t k = 0; k < n; ++k) {
      y = pp_step(y, p, dt, NoiseIncrement{});
    }
    return observables(y, tau_end).nb;
  };
  const double e1 = std::abs(euler_nb(1e-3) - nb_ref);
  const double e2 = std::abs(euler_nb(5e-4) - nb_ref);
  REQUIRE(e1 > 1e-10);
  CHECK(e1 / e2 == Catch::Approx(2.0).margin(0.35));
}

TEST_CASE("trajectory divergence is flagged with truncated samples",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  TimeGrid grid{0.5, 1e-3, 10};
  TrajectoryOptions opts;
  opts.guard = 3.0;  // below sqrt(10): dies on the first step
  const auto r = run_trajectory(initial_state(10.0), p, grid, 11, opts);
  CHECK(r.diverged);
  CHECK(r.divergence_tau == Catch::Approx(1e-3).epsilon(1e-12));
  CHECK(r.moments.size() == 1);  // only the tau = 0 sample
}

TEST_CASE("ensemble statistics are identical for any worker count",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  TimeGrid grid{0.1, 5e-4, 40};
  const ModeAmplitudes init = initial_state(10.0);
  const auto s1 = simulate_ensemble(init, p, grid, 150, 777, 1);
  const auto s2 = simulate_ensemble(init, p, grid, 150, 777, 2);
  const auto s5 = simulate_ensemble(init, p, grid, 150, 777, 5);
  REQUIRE(s1.samples.size() == s2.samples.size());
  REQUIRE(s1.samples.size() == s5.samples.size());
  for (std::size_t j = 0; j < s1.samples.size(); ++j) {
    for (int o = 0; o < 5; ++o) {
      CHECK(s1.samples[j].mean[o] == s2.samples[j].mean[o]);
      CHECK(s1.samples[j].mean[o] == s5.samples[j].mean[o]);
      CHECK(s1.samples[j].se[o] == s5.samples[j].se[o]);
    }
  }
  CHECK(s1.n_diverged == s5.n_diverged);
}

TEST_CASE("ensemble mean conserves particle number within 3 stderr",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  TimeGrid grid{0.25, 5e-4, 25};
  const auto stats =
      simulate_ensemble(initial_state(10.0), p, grid, 600, 4242, 0);
  CHECK(stats.n_diverged == 0);
  for (const auto& s : stats.samples) {
    // the 1e-12 floor absorbs representation roundoff of sqrt(n0)^2 at
    // the zero-variance samples near tau = 0
    const double dev = std::abs(s.mean[3] - 10.0);
    CHECK(dev <= 3.0 * s.se[3] + 1e-12);
  }
}

TEST_CASE("noise is exactly absent while the molecular mode is empty",
          "[positive_p]") {
  // lambda = 0: every diffusion amplitude reduces to sqrt(-2i b)-type
  // terms.  b stays 0 for the first two steps (a2 = 0, then b = 0), so all
  // trajectories coincide and the spread is exactly zero.
  ModelParams p = params_g(4.0);
  TimeGrid grid{2e-4, 1e-4, 1};
  const auto stats =
      simulate_ensemble(initial_state(1000.0), p, grid, 50, 31415, 2);
  REQUIRE(stats.samples.size() == 3);
  for (int o = 0; o < 5; ++o) {
    CHECK(stats.samples[1].se[o] == 0.0);
    CHECK(stats.samples[2].se[o] == 0.0);
  }
  // and the common value is the deterministic Euler path
  ModeAmplitudes y = initial_state(1000.0);
  y = pp_step(y, p, grid.dt, NoiseIncrement{});
  y = pp_step(y, p, grid.dt, NoiseIncrement{});
  CHECK(stats.samples[2].mean[0] == observables(y, 0.0).n1);
  CHECK(stats.samples[2].mean[2] == observables(y, 0.0).nb);
}

TEST_CASE("ensemble mean of a1p approaches conj(mean of a1)",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  TimeGrid grid{0.3, 5e-4, 150};
  const ModeAmplitudes init = initial_state(10.0);
  const std::int64_t n = 400;

  // aggregate d = a1p - conj(a1) per recorded sample and require the mean
  // to vanish within 3 standard errors componentwise
  TrajectoryOptions opts;
  opts.record_states = true;
  const std::size_t n_samples = grid.sample_steps().size();
  std::vector<detail::Welford> re(n_samples), im(n_samples);
  for (std::int64_t k = 0; k < n; ++k) {
    const auto r = run_trajectory(init, p, grid, rng::hash_seed(999, k), opts);
    REQUIRE(!r.diverged);
    for (std::size_t j = 0; j < r.states.size(); ++j) {
      const cplx d = r.states[j].a1p - std::conj(r.states[j].a1);
      re[j].add(d.real());
      im[j].add(d.imag());
    }
  }
  for (std::size_t j = 1; j < n_samples; ++j) {
    CHECK(std::abs(re[j].mean) <= 3.0 * re[j].stderr_of_mean());
    CHECK(std::abs(im[j].mean) <= 3.0 * im[j].stderr_of_mean());
  }
}

TEST_CASE("doubling the ensemble shrinks the standard error like 1/sqrt(2)",
          "[positive_p]") {
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  TimeGrid grid{0.3, 5e-4, 600};
  const ModeAmplitudes init = initial_state(10.0);
  const auto small = simulate_ensemble(init, p, grid, 500, 2718, 0);
  const auto large = simulate_ensemble(init, p, grid, 1000, 2718, 0);
  const double ratio =
      large.samples.back().se[2] / small.samples.back().se[2];
  CHECK(ratio == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(0.20));
}

TEST_CASE("divergence accounting: unreliable flag and total failure",
          "[positive_p]") {
  // strong collisions with a guard close to the initial amplitude: a
  // deterministic (seeded) fraction of trajectories escapes quickly
  ModelParams p = params_g(0.0, 5.0, 0.0);
  TimeGrid grid{0.02, 1e-3, 2};
  ModeAmplitudes init = initial_state(10.0);
  init.b = 0.5;  // populate the PA noise channel
  init.bp = 0.5;

  SECTION("a diverged fraction above 1% flags the run") {
    EnsembleOptions opts;
    opts.guard = 4.0;
    const auto stats = simulate_ensemble(init, p, grid, 200, 1234, 2, opts);
    INFO("diverged " << stats.n_diverged << "/200");
    CHECK(stats.n_diverged > 2);
    CHECK(stats.n_diverged < 200);
    CHECK(stats.unreliable);
    // per-sample survivor counts shrink but stay positive
    CHECK(stats.samples.back().n_surviving ==
          stats.n_trajectories - stats.n_diverged);
  }
  SECTION("every trajectory diverging is a hard error") {
    EnsembleOptions opts;
    opts.guard = 1.0;  // below the initial amplitude: instant failure
    CHECK_THROWS_AS(simulate_ensemble(init, p, grid, 50, 1234, 2, opts),
                    DivergenceError);
  }
}

TEST_CASE("n_traj below 2 is rejected", "[positive_p]") {
  CHECK_THROWS_AS(simulate_ensemble(initial_state(1.0), params_g(1.0),
                                    TimeGrid{0.1, 1e-3, 10}, 1, 1, 1),
                  ParameterError);
}

TEST_CASE("weak bias scales linearly in dt (coupled refinement)",
          "[positive_p]") {
  // Brownian increments drawn at dt/8 and summed for the coarser levels:
  // the dt and dt/2 biases against the dt/8 reference should sit near the
  // first-order prediction of 7/3.
  const ModelParams p = params_g(2.0, 1e-3, 1e-3);
  const double tau_end = 0.5;
  const double dt = 4e-3;
  const std::int64_t n_traj = 800;
  const std::int64_t n_fine = std::llround(tau_end / (dt / 8.0));

  detail::Welford d1, d2;
  std::vector<std::array<double, 6>> fine(static_cast<std::size_t>(n_fine));
  for (std::int64_t k = 0; k < n_traj; ++k) {
    const std::uint64_t seed = rng::hash_seed(171717, k);
    const double sq = std::sqrt(dt / 8.0);
    for (std::int64_t s = 0; s < n_fine; ++s) {
      const auto z = rng::step_normals(seed, static_cast<std::uint64_t>(s));
      for (int j = 0; j < 6; ++j) fine[s][j] = z[j] * sq;
    }
    auto run_level = [&](int group) {
      ModeAmplitudes y = initial_state(10.0);
      NoiseIncrement noise;
      for (std::int64_t s = 0; s < n_fine; s += group) {
        noise.eta = {};
        for (int g = 0; g < group; ++g) {
          for (int j = 0; j < 6; ++j) noise.eta[j] += fine[s + g][j];
        }
        y = pp_step(y, p, dt * group / 8.0, noise);
      }
      return observables(y, tau_end).nb;
    };
    const double nb8 = run_level(1);
    d2.add(run_level(4) - nb8);
    d1.add(run_level(8) - nb8);
  }
  INFO("b1 = " << d1.mean << " +- " << d1.stderr_of_mean()
               << ", b2 = " << d2.mean << " +- " << d2.stderr_of_mean());
  REQUIRE(d2.mean > 0.0);
  const double ratio = d1.mean / d2.mean;
  CHECK(ratio > 1.4);
  CHECK(ratio < 3.5);
}
