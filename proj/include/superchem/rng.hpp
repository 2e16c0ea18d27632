#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace superchem::rng {

// Philox 4x32-10 counter-based generator.  A block is a pure function of
// (key, counter), which is what makes trajectory streams reproducible
// independently of scheduling: trajectory k draws from key hash(seed, k)
// and counter (step, block).
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::uint64_t ctr_lo,
                                               std::uint64_t ctr_hi) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t x0 = static_cast<std::uint32_t>(ctr_lo);
  std::uint32_t x1 = static_cast<std::uint32_t>(ctr_lo >> 32);
  std::uint32_t x2 = static_cast<std::uint32_t>(ctr_hi);
  std::uint32_t x3 = static_cast<std::uint32_t>(ctr_hi >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);

  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x2;
    const std::uint32_t y0 =
        static_cast<std::uint32_t>(p1 >> 32) ^ x1 ^ k0;
    const std::uint32_t y1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t y2 =
        static_cast<std::uint32_t>(p0 >> 32) ^ x3 ^ k1;
    const std::uint32_t y3 = static_cast<std::uint32_t>(p0);
    x0 = y0;
    x1 = y1;
    x2 = y2;
    x3 = y3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {x0, x1, x2, x3};
}

/// splitmix64 finalizer: maps (master_seed, index) to a well-mixed
/// per-trajectory key.
inline std::uint64_t hash_seed(std::uint64_t master_seed,
                               std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform double in (0, 1] built from 53 bits of two 32-bit words.
inline double u53_open0(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Two standard normals from one Philox block (Box-Muller).
inline std::array<double, 2> normal_pair(std::uint64_t key,
                                         std::uint64_t ctr_lo,
                                         std::uint64_t ctr_hi) {
  const auto w = philox4x32(key, ctr_lo, ctr_hi);
  const double u1 = u53_open0(w[0], w[1]);
  const double u2 = u53_open0(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

/// The six standard normals consumed by one stochastic step.  Blocks are
/// addressed by (step, channel-pair), so any step of any trajectory can be
/// regenerated without sequential state.
inline std::array<double, 6> step_normals(std::uint64_t key,
                                          std::uint64_t step) {
  std::array<double, 6> out;
  for (std::uint64_t j = 0; j < 3; ++j) {
    const auto z = normal_pair(key, step, j);
    out[2 * j] = z[0];
    out[2 * j + 1] = z[1];
  }
  return out;
}

}  // namespace superchem::rng
