#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "superchem/model.hpp"

namespace superchem {

inline constexpr int kDefaultMaxSector = 40;

/// Number basis of one conserved sector N = n1 + n2 + 2 nb.  States are
/// ordered nb descending, then n2 ascending (n1 is determined), which fixes
/// matrix layout and serialization.
struct FockBasis {
  struct State {
    int n1, n2, nb;
  };
  int sector_n = 0;
  std::vector<State> states;
  std::vector<int> nb_offset;  ///< first index of each nb block

  int dim() const { return static_cast<int>(states.size()); }

  /// Index of (n1, n2, nb) within the sector; n1 is implied.
  int index_of(int n2, int nb) const { return nb_offset[nb] + n2; }
};

/// All (n1, n2, nb) with n1 + n2 + 2 nb = n.  The sector dimension is
/// sum_{nb=0}^{n/2} (n - 2 nb + 1).
inline FockBasis enumerate_basis(int n, int max_sector = kDefaultMaxSector) {
  if (n < 0) throw ParameterError("enumerate_basis: n must be >= 0");
  if (n > max_sector) {
    throw CapacityError("enumerate_basis: sector " + std::to_string(n) +
                        " exceeds the configured maximum " +
                        std::to_string(max_sector));
  }
  FockBasis basis;
  basis.sector_n = n;
  basis.nb_offset.assign(static_cast<std::size_t>(n / 2) + 1, 0);
  for (int nb = n / 2; nb >= 0; --nb) {
    basis.nb_offset[nb] = basis.dim();
    for (int n2 = 0; n2 <= n - 2 * nb; ++n2) {
      basis.states.push_back({n - 2 * nb - n2, n2, nb});
    }
  }
  return basis;
}

/// Compressed sparse rows; complex entries (non-Hermitian when the decay
/// rate is nonzero).
struct SparseMatrix {
  int dim = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<cplx> val;

  /// y = A x
  void apply(const cplx* x, cplx* y) const {
    for (int i = 0; i < dim; ++i) {
      cplx acc{};
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        acc += val[k] * x[col[k]];
      }
      y[i] = acc;
    }
  }
};

/// Sector Hamiltonian in scaled units (PA strength = 1):
///   diagonal  -(delta + i Gamma/2) nb + La [n1(n1-1) + n2(n2-1)]
///             + Lb nb(nb-1)
///   rf        G sqrt(n1 (n2+1)) between (n1,n2,nb) and (n1-1,n2+1,nb)
///   PA        sqrt(n2 (n2-1) (nb+1)) between (n1,n2,nb) and
///             (n1,n2-2,nb+1)
/// Exactly Hermitian when Gamma = 0; never mixes sectors.  The term
/// switches match the drift's, so isolated pieces of the model can be
/// cross-checked between representations.
inline SparseMatrix hamiltonian_matrix(const ModelParams& p,
                                       const FockBasis& basis,
                                       const ModelTerms& terms = {}) {
  p.validate();
  const double g = terms.rf ? p.g_rf : 0.0;
  const double la = terms.collisions ? p.lambda_a : 0.0;
  const double lb = terms.collisions ? p.lambda_b : 0.0;
  const double delta = terms.detuning_decay ? p.delta : 0.0;
  const double decay = terms.detuning_decay ? p.gamma_decay : 0.0;

  SparseMatrix h;
  h.dim = basis.dim();
  h.row_ptr.reserve(static_cast<std::size_t>(h.dim) + 1);
  h.row_ptr.push_back(0);

  struct Entry {
    int col;
    cplx val;
  };
  std::vector<Entry> row;
  for (int i = 0; i < h.dim; ++i) {
    const auto [n1, n2, nb] = basis.states[static_cast<std::size_t>(i)];
    row.clear();
    if (terms.pa) {
      // a2+^2 b : from (n1, n2-2, nb+1)
      if (n2 >= 2) {
        row.push_back({basis.index_of(n2 - 2, nb + 1),
                       std::sqrt(static_cast<double>(n2) * (n2 - 1.0) *
                                 (nb + 1.0))});
      }
      // b+ a2^2 : from (n1, n2+2, nb-1)
      if (nb >= 1) {
        row.push_back({basis.index_of(n2 + 2, nb - 1),
                       std::sqrt((n2 + 1.0) * (n2 + 2.0) *
                                 static_cast<double>(nb))});
      }
    }
    if (g != 0.0) {
      // a1+ a2 : from (n1-1, n2+1, nb)
      if (n1 >= 1) {
        row.push_back({basis.index_of(n2 + 1, nb),
                       g * std::sqrt(static_cast<double>(n1) * (n2 + 1.0))});
      }
      // a2+ a1 : from (n1+1, n2-1, nb)
      if (n2 >= 1) {
        row.push_back({basis.index_of(n2 - 1, nb),
                       g * std::sqrt((n1 + 1.0) *
                                     static_cast<double>(n2))});
      }
    }
    const double diag_re = -delta * nb +
                           la * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0)) +
                           lb * nb * (nb - 1.0);
    const double diag_im = -0.5 * decay * nb;
    row.push_back({i, cplx{diag_re, diag_im}});

    std::sort(row.begin(), row.end(),
              [](const Entry& a, const Entry& b) { return a.col < b.col; });
    for (const Entry& e : row) {
      h.col.push_back(e.col);
      h.val.push_back(e.val);
    }
    h.row_ptr.push_back(static_cast<int>(h.col.size()));
  }
  return h;
}

/// Wavefunction restricted to one sector.  Norm is conserved for Gamma = 0
/// and non-increasing otherwise.
struct SectorWavefunction {
  FockBasis basis;
  std::vector<cplx> amplitudes;

  double norm2() const {
    double s = 0.0;
    for (const cplx& c : amplitudes) s += std::norm(c);
    return s;
  }
};

/// Raw (norm-weighted) per-sample expectations of one evolved sector.
struct SectorSeries {
  std::vector<double> taus;
  /// per sample: n1, n2, nb, g2_b_num = sum |c|^2 nb (nb - 1)
  std::vector<std::array<double, 4>> expect;
  std::vector<double> norm2;
};

/// RK4 integration of i d psi / d tau = H psi on the grid.  With
/// Gamma = 0 a final norm drift above 1e-6 raises AccuracyError (the dt is
/// too coarse for this sector's spectral range).
inline SectorSeries evolve_sector(const ModelParams& params,
                                  const FockBasis& basis,
                                  const SectorWavefunction& psi0,
                                  const TimeGrid& grid,
                                  const ModelTerms& terms = {}) {
  params.validate();
  grid.validate();
  if (static_cast<int>(psi0.amplitudes.size()) != basis.dim()) {
    throw ParameterError("evolve_sector: amplitude/basis size mismatch");
  }
  const SparseMatrix h = hamiltonian_matrix(params, basis, terms);
  const int dim = basis.dim();
  const std::int64_t n = grid.n_steps();
  const double dt = grid.dt;

  std::vector<cplx> y = psi0.amplitudes;
  std::vector<cplx> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const cplx mi{0.0, -1.0};

  SectorSeries out;
  auto record = [&](std::int64_t k) {
    double e_n1 = 0.0, e_n2 = 0.0, e_nb = 0.0, e_g2 = 0.0, nrm = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double w = std::norm(y[static_cast<std::size_t>(i)]);
      const auto& st = basis.states[static_cast<std::size_t>(i)];
      e_n1 += w * st.n1;
      e_n2 += w * st.n2;
      e_nb += w * st.nb;
      e_g2 += w * st.nb * (st.nb - 1.0);
      nrm += w;
    }
    out.taus.push_back(static_cast<double>(k) * dt);
    out.expect.push_back({e_n1, e_n2, e_nb, e_g2});
    out.norm2.push_back(nrm);
  };
  record(0);

  auto deriv = [&](const std::vector<cplx>& x, std::vector<cplx>& dx) {
    h.apply(x.data(), dx.data());
    for (cplx& v : dx) v *= mi;
  };
  for (std::int64_t k = 1; k <= n; ++k) {
    deriv(y, k1);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    deriv(tmp, k2);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    deriv(tmp, k3);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
    deriv(tmp, k4);
    for (int i = 0; i < dim; ++i) {
      y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (k % grid.sample_stride == 0 || k == n) record(k);
  }

  if (params.gamma_decay == 0.0 &&
      std::abs(out.norm2.back() - out.norm2.front()) > 1e-6) {
    throw AccuracyError(
        "evolve_sector: norm drift exceeds 1e-6; reduce dt (sector " +
        std::to_string(basis.sector_n) + ")");
  }
  return out;
}

/// Smallest n such that the Poisson(n0) tail mass beyond n is < eps.
inline int poisson_cutoff(double n0_mean, double eps) {
  if (!(n0_mean >= 0.0) || !std::isfinite(n0_mean)) {
    throw ParameterError("poisson_cutoff: n0_mean must be finite and >= 0");
  }
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw ParameterError("poisson_cutoff: epsilon_tail must be in (0, 1)");
  }
  double w = std::exp(-n0_mean);
  double cum = w;
  int n = 0;
  while (1.0 - cum >= eps) {
    ++n;
    w *= n0_mean / n;
    cum += w;
    if (n > 100000) break;  // eps below double resolution of the tail
  }
  return n;
}

/// Poisson weights w_n = e^{-n0} n0^n / n! for n = 0..n_max.
inline std::vector<double> poisson_weights(double n0_mean, int n_max) {
  std::vector<double> w(static_cast<std::size_t>(n_max) + 1);
  w[0] = std::exp(-n0_mean);
  for (int n = 1; n <= n_max; ++n) w[n] = w[n - 1] * n0_mean / n;
  return w;
}

struct CoherentEvolveResult {
  std::vector<ObservableSample> samples;
  double dropped_mass = 0.0;  ///< Poisson mass beyond the evolved sectors
  int n_max = 0;              ///< largest evolved sector
};

/// Exact evolution of a coherent-state start: decompose over number
/// sectors with Poisson weights, evolve each sector from all atoms in mode
/// 1, and recombine the (number-diagonal) observables with the weights.
inline CoherentEvolveResult evolve_coherent(const ModelParams& params,
                                            double n0_mean,
                                            double epsilon_tail,
                                            const TimeGrid& grid,
                                            int max_sector =
                                                kDefaultMaxSector) {
  if (!(n0_mean >= 0.0) || !std::isfinite(n0_mean)) {
    throw ParameterError("evolve_coherent: n0_mean must be finite and >= 0");
  }
  const int n_max = poisson_cutoff(n0_mean, epsilon_tail);
  if (n_max > max_sector) {
    // report the largest mean the configured basis can hold
    double lo = 0.0, hi = n0_mean;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (poisson_cutoff(mid, epsilon_tail) <= max_sector) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    throw CapacityError(
        "evolve_coherent: n0_mean " + std::to_string(n0_mean) +
        " needs sector " + std::to_string(n_max) + " > maximum " +
        std::to_string(max_sector) + "; largest feasible n0_mean is about " +
        std::to_string(lo));
  }

  const std::vector<double> w = poisson_weights(n0_mean, n_max);
  double kept = 0.0;
  for (double wn : w) kept += wn;

  const auto steps = grid.sample_steps();
  CoherentEvolveResult out;
  out.n_max = n_max;
  out.dropped_mass = 1.0 - kept;
  out.samples.assign(steps.size(), ObservableSample{});
  for (std::size_t j = 0; j < steps.size(); ++j) {
    out.samples[j].tau = static_cast<double>(steps[j]) * grid.dt;
  }

  for (int n = 0; n <= n_max; ++n) {
    const FockBasis basis = enumerate_basis(n, max_sector);
    SectorWavefunction psi0;
    psi0.basis = basis;
    psi0.amplitudes.assign(static_cast<std::size_t>(basis.dim()), cplx{});
    psi0.amplitudes[static_cast<std::size_t>(basis.index_of(0, 0))] = 1.0;
    const SectorSeries series = evolve_sector(params, basis, psi0, grid);
    for (std::size_t j = 0; j < steps.size(); ++j) {
      ObservableSample& s = out.samples[j];
      s.n1 += w[n] * series.expect[j][0];
      s.n2 += w[n] * series.expect[j][1];
      s.nb += w[n] * series.expect[j][2];
      s.g2_b_num += w[n] * series.expect[j][3];
    }
  }
  for (ObservableSample& s : out.samples) {
    s.n_total = s.n1 + s.n2 + 2.0 * s.nb;
  }
  return out;
}

}  // namespace superchem
