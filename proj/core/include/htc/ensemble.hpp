#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "htc/analysis.hpp"
#include "htc/dense.hpp"
#include "htc/model.hpp"
#include "htc/mps.hpp"
#include "htc/semiclassical.hpp"

namespace htc {

enum class Engine { Mps, Dense, Ehrenfest, Twa };

std::string engine_name(Engine e);
Engine parse_engine(const std::string& name);

struct EnsembleConfig {
  int n_realizations = 1;
  std::uint64_t master_seed = 0;
  Engine engine = Engine::Mps;
  InitialStateSpec spec = InitialStateSpec::molecule(1);
  std::vector<double> sample_times;  // internal units; empty = {0, period}
  EvolutionConfig evolution{};       // dt <= 0 selects period / 400
  DenseOptions dense{};
  SemiclassicalConfig semiclassical{};  // n_traj and dt used; seeds come from the realization
  double weyl_threshold = kWeylThreshold;
  int workers = 1;
};

/// Seed of realization k: a hash of (master seed, k).
std::uint64_t realization_seed(std::uint64_t master_seed, int k);

struct RealizationDiagnostics {
  double norm_error = 0.0;          // max | ||psi|| - 1 |
  double energy_drift = 0.0;        // max |E(t) - E(0)|
  double excitation_drift = 0.0;    // max |N_exc(t) - 1|
  double truncation_weight = 0.0;
  double max_step_truncation = 0.0;
  Index max_bond_dim = 0;
  int alarms = 0;
  double spin_drift = 0.0;          // semiclassical only
  double wall_seconds = 0.0;
};

struct RealizationResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::vector<double> epsilons;
  std::vector<std::vector<CMatrix>> rho;  // [time][molecule - 1]
  std::vector<double> photon_number;      // per time
  std::vector<double> energy;             // per time
  std::vector<TrajectorySample> trajectories;  // semiclassical engine only
  RealizationDiagnostics diagnostics;
};

struct EnsembleResult {
  Engine engine = Engine::Mps;
  std::vector<double> times;
  int focus_molecule = 0;           // initially excited molecule, 0 for cavity excitation
  std::vector<CMatrix> xi_focus;    // disorder average of the focus molecule (empty for cavity excitation)
  std::vector<CMatrix> xi_avg;      // average over molecules and realizations
  std::vector<RealizationResult> realizations;

  /// delta of the focus molecule per realization at time index j.
  std::vector<double> focus_scatter(int j) const;
};

/// Runs every realization on a worker pool and folds results in realization order.
/// An engine failure is rethrown with the realization id and seed in the message.
EnsembleResult run_ensemble(const EnsembleConfig& config, const HTCParams& params);

/// One realization of `config.engine`; exposed for tests and the CLI.
RealizationResult run_realization(const EnsembleConfig& config, const HTCParams& params, int k);

/// Convex combination of equally shaped states, summed in the given order.
CMatrix aggregate(const std::vector<CMatrix>& states, const std::vector<double>& weights);

enum class SweepAxis { None, MoleculeNumber, DisorderStrength };

struct SweepConfig {
  SweepAxis axis = SweepAxis::MoleculeNumber;
  std::vector<double> values;
  std::optional<Engine> compare;  // approximate engine compared against the primary run
  GridSpec grid{};
};

struct SweepRow {
  double value = 0.0;
  int n_molecules = 0;
  double disorder_w = 0.0;
  double delta_focus = 0.0;           // delta[xi_1] at the final time
  double delta_avg = 0.0;             // delta[xi_avg]
  double scatter_mean = 0.0;          // mean of per-realization delta[rho_1^(k)]
  double scatter_std = 0.0;
  double infidelity_focus = std::numeric_limits<double>::quiet_NaN();  // 1 - O_1
  double infidelity_avg = std::numeric_limits<double>::quiet_NaN();    // 1 - O_avg
  double compare_delta_focus = std::numeric_limits<double>::quiet_NaN();
  double max_truncation = 0.0;
};

/// End-time observables over N or W. Realization seeds are shared by the
/// primary and comparison engines so differences are paired per realization.
std::vector<SweepRow> sweep(const EnsembleConfig& config, const HTCParams& params, const SweepConfig& sweep_config);

}  // namespace htc
