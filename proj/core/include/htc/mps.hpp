#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "htc/model.hpp"

namespace htc {

/// One MPS bond split into excitation-number sectors.
///
/// The charge of a bond is the number of excitations (photons plus excited
/// molecules) carried by the sites to its left. Sectors are sorted by charge.
struct Bond {
  std::vector<int> charges;
  std::vector<Index> dims;

  int find(int charge) const;
  Index total() const;
  Index offset(int sector) const;
  int sectors() const { return static_cast<int>(charges.size()); }
};

/// Matrix product state of one cavity site and N merged electro-vibrational
/// molecule sites, with the cavity free to sit anywhere in the chain.
///
/// Tensors are stored block-sparse: for physical state s and left sector l the
/// block maps to the right sector with charge left.charges[l] + charge(s).
class MatrixProductState {
 public:
  struct Site {
    int molecule = 0;               // 1-based molecule id, 0 for the cavity
    std::vector<int> phys_charge;   // excitation number of each local basis state
    std::vector<CMatrix> blocks;    // blocks[s * left_sectors + l]; 0x0 when the right sector is absent

    int dim() const { return static_cast<int>(phys_charge.size()); }
  };

  /// Cavity at site 0 followed by molecules 1..N; right-canonical, centre at 0.
  static MatrixProductState from_product(const ProductState& product, const HTCParams& params);

  int num_sites() const { return static_cast<int>(sites_.size()); }
  int n_molecules() const { return num_sites() - 1; }
  int cavity_position() const { return cavity_pos_; }
  int site_of_molecule(int molecule) const;
  /// Orthogonality centre. Sites left of it are left-canonical, right of it right-canonical.
  int center() const { return center_; }
  const Site& site(int k) const { return sites_[static_cast<std::size_t>(k)]; }
  /// Bond k sits to the left of site k; k in [0, num_sites()].
  const Bond& bond(int k) const { return bonds_[static_cast<std::size_t>(k)]; }
  Index max_bond_dim() const;

  /// Sum of discarded weights of all truncations so far.
  double truncation_weight() const { return truncation_weight_; }
  /// Largest discarded weight of a single truncation.
  double max_step_truncation() const { return max_step_truncation_; }

  double norm() const;
  /// Site tensor k as dense chi_L x chi_R matrices, one per physical state.
  std::vector<CMatrix> dense_site(int k) const;

  /// Full amplitude vector on cavity (x) molecule_1 (x) ... (x) molecule_N.
  /// Exponential in N; for tests against the dense oracle.
  CVector to_full_vector() const;

  /// Single-site SVD sweep right to left; leaves the centre at site 0.
  void right_canonicalize();

  void save(const std::filesystem::path& path) const;
  static MatrixProductState load(const std::filesystem::path& path);

  friend class TebdEngine;

 private:
  std::vector<Site> sites_;
  std::vector<Bond> bonds_;
  int cavity_pos_ = 0;
  int center_ = 0;
  double truncation_weight_ = 0.0;
  double max_step_truncation_ = 0.0;
};

struct EvolutionConfig {
  double dt = 0.0;                 // Trotter step, internal time units (1/g_c)
  double t_final = 0.0;            // horizon; default one vibrational period
  int chi_max = 64;
  double svd_cutoff = 1e-10;       // singular values below this (relative) are dropped
  double truncation_alarm = 1e-8;  // per-truncation discarded weight that raises
  bool throw_on_alarm = true;      // false: count alarms instead of throwing
  bool ehrenfest_mode = false;     // mean-field product ansatz, see ehrenfest.hpp
  int trotter_order = 2;           // 2, or 4 by symmetric (Suzuki) composition of second-order steps
  std::vector<double> sample_times;

  /// dt = period / 400, t_final = one period, samples at 0 and t_final.
  static EvolutionConfig defaults(const HTCParams& params);
  void validate() const;
};

/// Thrown when a single truncation discards more than the configured alarm.
struct TruncationAlarm : NumericalError {
  using NumericalError::NumericalError;
};

struct TebdDiagnostics {
  int steps = 0;
  int alarms = 0;
  double truncation_weight = 0.0;
  double max_step_truncation = 0.0;
  Index max_bond_dim = 0;
};

/// Time-evolving block decimation with a symmetric (second-order) Trotter
/// step. The cavity is swapped through the chain: a left-to-right sweep of
/// gates exp(-i dt/2 (h_ci + h_i)) followed by the mirrored right-to-left sweep.
class TebdEngine {
 public:
  TebdEngine(const HamiltonianTerms& terms, const EvolutionConfig& config);

  /// One full Trotter step of size dt. Requires the cavity at site 0.
  void step(MatrixProductState& state, double dt);
  const TebdDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  struct GateSector {
    std::vector<std::pair<int, int>> in;
    std::vector<std::pair<int, int>> out;
    CMatrix block;  // out x in
  };
  struct Gate {
    int d_left_in = 0, d_right_in = 0, d_left_out = 0, d_right_out = 0;
    std::vector<int> c_left_in, c_right_in, c_left_out, c_right_out;
    std::vector<int> sector_charge;
    std::vector<GateSector> sectors;
  };
  struct GatePair {
    Gate cavity_left;   // (cavity, molecule) -> (molecule, cavity)
    Gate cavity_right;  // (molecule, cavity) -> (cavity, molecule)
  };

  static Gate make_gate(const CMatrix& u, int dc, int dm, bool cavity_left, const std::vector<int>& cav_charge,
                        const std::vector<int>& mol_charge);
  void apply(MatrixProductState& state, int k, const Gate& gate, bool move_right);

  HamiltonianTerms terms_;
  EvolutionConfig config_;
  std::map<double, std::vector<GatePair>> cached_;
  TebdDiagnostics diagnostics_;
};

using MpsObserver = std::function<void(double time, const MatrixProductState& state)>;

/// Evolves `state` through config.sample_times (ascending), calling `observer`
/// at each sample time. Each interval is split into ceil(interval / dt) equal steps.
TebdDiagnostics evolve_tebd(MatrixProductState& state, const HamiltonianTerms& terms, const EvolutionConfig& config,
                            const MpsObserver& observer);

/// Convenience overload returning a copy of the state at every sample time.
std::vector<MatrixProductState> evolve_tebd(MatrixProductState state, const HamiltonianTerms& terms,
                                            const EvolutionConfig& config);

/// Reduced density matrix of every site (physical basis), normalised to unit trace.
std::vector<CMatrix> site_density_matrices(const MatrixProductState& state);

/// Reduced vibrational density matrix of molecule i (1-based).
CMatrix reduced_vibrational_dm(const MatrixProductState& state, int molecule);

/// <op> for a single-site operator on site `site`.
Complex expectation(const MatrixProductState& state, const CMatrix& op, int site);

/// <op_a(site_a) op_b(site_b)> for two distinct sites.
Complex correlator(const MatrixProductState& state, const CMatrix& op_a, int site_a, const CMatrix& op_b, int site_b);

/// <H> for the Hamiltonian described by `terms`.
double energy(const MatrixProductState& state, const HamiltonianTerms& terms);

/// <a^dag a + sum_i sigma_i^+ sigma_i^->.
double excitation_number(const MatrixProductState& state);

}  // namespace htc
