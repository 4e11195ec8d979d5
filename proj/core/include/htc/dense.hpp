#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "htc/krylov.hpp"
#include "htc/model.hpp"

namespace htc {

struct DenseOptions {
  Index dimension_limit = 200000;
  bool single_excitation_block = true;  // restrict to the excitation sector of the initial state
  KrylovOptions krylov{};
};

/// Basis of the truncated cavity (x) electronic (x) vibrational space.
///
/// Each state is an electronic configuration (photon number, excitation mask)
/// times a vibrational multi-index. Index = config * V + vib where
/// vib = sum_i v_i dv^(N - i), molecule 1 most significant.
class DenseBasis {
 public:
  struct Config {
    int photons = 0;
    std::uint64_t mask = 0;  // bit i-1 set <=> molecule i excited
  };

  DenseBasis(const HTCParams& params, int excitations, bool restrict_block);

  Index dim() const { return static_cast<Index>(configs_.size()) * vib_states_; }
  Index vib_states() const { return vib_states_; }
  int n_molecules() const { return n_molecules_; }
  int vib_dim() const { return vib_dim_; }
  const std::vector<Config>& configs() const { return configs_; }
  /// Stride of molecule i's vibrational digit in the vib multi-index.
  Index vib_stride(int molecule) const;
  /// Index of (config, vib) or -1 when the configuration is not in the basis.
  Index find(int photons, std::uint64_t mask, Index vib) const;

  /// Dimension without building anything; used for the resource check.
  static double predicted_dim(const HTCParams& params, int excitations, bool restrict_block);

 private:
  int n_molecules_;
  int vib_dim_;
  int cavity_dim_;
  Index vib_states_;
  std::vector<Config> configs_;
  std::unordered_map<std::uint64_t, Index> config_index_;
};

struct DenseState {
  std::shared_ptr<const DenseBasis> basis;
  CVector amplitudes;
  double time = 0.0;
};

/// Exact propagation of the full HTC Hamiltonian for one realization.
class DenseSystem {
 public:
  DenseSystem(const HTCParams& params, const DisorderRealization& realization, int excitations,
              const DenseOptions& options = {});

  const DenseBasis& basis() const { return *basis_; }
  const SparseHamiltonian& hamiltonian() const { return h_; }
  const HTCParams& params() const { return params_; }

  DenseState prepare(const InitialStateSpec& spec) const;
  DenseState prepare(const ProductState& product) const;
  /// Propagates `state` to each requested time (ascending, >= state.time).
  std::vector<DenseState> evolve(const DenseState& state, const std::vector<double>& times) const;
  DenseState step(const DenseState& state, double dt) const;

  double energy(const DenseState& state) const;
  double photon_number(const DenseState& state) const;
  double excited_population(const DenseState& state, int molecule) const;
  double excitation_number(const DenseState& state) const;
  /// Norm of the amplitude outside the initial excitation sector (full-space runs).
  double leakage(const DenseState& state, int excitations) const;

 private:
  HTCParams params_;
  DenseOptions options_;
  std::shared_ptr<const DenseBasis> basis_;
  SparseHamiltonian h_;
};

std::vector<DenseState> dense_evolve(const HTCParams& params, const DisorderRealization& realization,
                                     const InitialStateSpec& spec, const std::vector<double>& times,
                                     const DenseOptions& options = {});

/// Reduced vibrational density matrix of molecule i (1-based), Fock basis.
CMatrix dense_rdm(const DenseState& state, int molecule);

}  // namespace htc
