#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "htc/ensemble.hpp"

namespace htc {

/// Schema violation in a run configuration.
struct ConfigError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

/// Everything a run needs, in internal units (energies in g_c, times in periods
/// where the field name says so).
struct RunConfig {
  double g_c_meV = 350.0;  // conversion for configs written with "units": "meV"

  HTCParams model{};
  InitialStateSpec initial = InitialStateSpec::molecule(1);

  double t_final_periods = 1.0;
  int n_samples = 11;                         // evenly spaced in [0, t_final], including both ends
  std::vector<double> sample_times_periods;   // overrides n_samples when non-empty
  int steps_per_period = 400;
  int chi_max = 64;
  double svd_cutoff = 1e-10;
  double truncation_alarm = 1e-8;
  bool throw_on_alarm = true;
  std::optional<int> trotter_order;           // unset: 2 for runs, 4 for oracle checks

  int n_traj = 10000;
  int semiclassical_steps_per_period = 800;
  double weyl_threshold = kWeylThreshold;
  int trajectory_chunk = 1024;

  Engine engine = Engine::Mps;
  int n_realizations = 1;
  std::uint64_t master_seed = 0;

  SweepAxis sweep_axis = SweepAxis::None;
  std::vector<double> sweep_values;
  std::optional<Engine> sweep_compare;

  DenseOptions dense{};
  GridSpec grid{};
  double oracle_tolerance = 1e-6;

  /// Sample times in internal units (1/g_c).
  std::vector<double> sample_times() const;
  EnsembleConfig ensemble_config(int workers) const;
  SweepConfig sweep_config() const;
  /// Throws ConfigError when values are out of range.
  void validate() const;
};

/// Parses the JSON text; unknown keys and wrong types are schema errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON in g_c units; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64-bit hash of the canonical serialisation, as 16 hex digits.
std::string config_hash(const RunConfig& config);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace htc
