#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "htc/types.hpp"

namespace htc {

enum class DisorderDistribution { Normal, Box };

/// Physical parameters of the disordered Holstein-Tavis-Cummings model.
///
/// Energies are in units of the collective coupling g_c (hbar = 1), so times
/// are in units of 1/g_c internally. `period()` converts to vibrational periods.
struct HTCParams {
  int n_molecules = 1;
  double g_collective = 1.0;
  double nu = 0.3;
  double huang_rhys_lambda = 0.4;  // displacement lambda; the Huang-Rhys factor is lambda^2
  double disorder_w = 0.0;
  double detuning = 0.0;           // exposed but unvalidated away from zero
  int n_max_vib = 8;
  int n_max_cav = 1;
  DisorderDistribution distribution = DisorderDistribution::Normal;

  /// Per-molecule coupling g = g_c / sqrt(N).
  double coupling() const;
  /// R = lambda^2 nu.
  double reorganization_energy() const;
  /// One vibrational period 2 pi / nu.
  double period() const;
  int vib_dim() const { return n_max_vib + 1; }
  int molecule_dim() const { return 2 * (n_max_vib + 1); }
  int cavity_dim() const { return n_max_cav + 1; }

  /// Throws InvalidArgument on non-physical values.
  void validate() const;
};

/// One draw of the static on-site energies eps_i.
struct DisorderRealization {
  std::uint64_t seed = 0;
  std::vector<double> epsilons;
};

/// Two normalised single-excitation initial states.
struct InitialStateSpec {
  enum class Kind { CavityExcited, MoleculeExcited };
  Kind kind = Kind::MoleculeExcited;
  int index = 1;  // 1-based molecule index, used for MoleculeExcited

  static InitialStateSpec cavity() { return {Kind::CavityExcited, 0}; }
  static InitialStateSpec molecule(int i) { return {Kind::MoleculeExcited, i}; }

  int total_excitations() const { return 1; }
  std::string label() const;
};

/// eps_i = W * z_i with z_i unit draws from a counter stream keyed by `seed`.
/// For fixed (seed, N) the unit draws do not depend on W, so sweeps over W
/// rescale one fixed draw. W = 0 gives exact zeros.
DisorderRealization sample_disorder(const HTCParams& params, std::uint64_t seed);

/// Dense local terms of the Hamiltonian on the truncated local spaces.
///
/// Molecule basis index s = e * (n_max_vib + 1) + v with e in {0 = g, 1 = e}.
/// Two-site (cavity, molecule) index is n * molecule_dim + s.
struct HamiltonianTerms {
  std::vector<CMatrix> onsite;           // nu b^dag b - lambda nu (b + b^dag) n_e + (eps_i + Delta) n_e
  std::vector<CMatrix> cavity_coupling;  // g (a^dag sigma^- + a sigma^+) on (cavity, molecule i)
  std::vector<double> epsilons;
  int n_molecules = 0;
  int molecule_dim = 0;
  int cavity_dim = 0;
};

HamiltonianTerms build_terms(const HTCParams& params, const DisorderRealization& realization);

/// Local operators shared by the engines.
struct LocalOperators {
  CMatrix cavity_number;   // a^dag a
  CMatrix cavity_create;   // a^dag
  CMatrix excited;         // sigma^+ sigma^- on a molecule site
  CMatrix lower;           // sigma^- on a molecule site
  CMatrix vib_number;      // b^dag b on a molecule site
  CMatrix vib_x;           // x on a molecule site
};

LocalOperators local_operators(const HTCParams& params);

/// Assembles the full Hamiltonian on cavity (x) molecule_1 (x) ... (x) molecule_N.
/// The cavity is the most significant factor. Intended for small N only.
CMatrix assemble_hamiltonian(const HamiltonianTerms& terms);

/// a^dag a + sum_i sigma_i^+ sigma_i^- on the same full space.
CMatrix total_excitation_operator(const HTCParams& params);

/// Product-state description of an initial state.
struct ProductState {
  CVector cavity;
  std::vector<CVector> molecules;
};

ProductState initial_state(const InitialStateSpec& spec, const HTCParams& params);

/// Thermal reference energy E0: R for molecule excitation, R / N for cavity excitation.
double thermal_reference_energy(const InitialStateSpec& spec, const HTCParams& params);

}  // namespace htc
