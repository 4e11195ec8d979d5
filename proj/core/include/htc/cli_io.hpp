#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "htc/config.hpp"
#include "htc/io.hpp"

namespace htc {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitSchema = 2, kExitEngine = 3, kExitResource = 4 };

/// Schema and argument errors map to 2, resource-limit refusals to 4,
/// anything else raised by an engine to 3.
int exit_code_for(const std::exception& e);

/// Command-line overrides applied on top of a parsed configuration.
struct Overrides {
  std::optional<Engine> engine;
  std::optional<std::uint64_t> seed;
};

RunConfig apply_overrides(RunConfig config, const Overrides& overrides);

/// Worker count for CLI runs: the environment variable wins when set,
/// then a positive flag value, then the hardware concurrency.
int cli_workers(int flag_value);

/// Runs the ensemble and writes series.csv, scatter.csv, observables.csv,
/// diagnostics.csv, states.bin/states.json and manifest.json into `out`.
EnsembleResult simulate(const RunConfig& config, const std::filesystem::path& out, int workers);

/// Runs the configured sweep and writes sweep.csv (long form) and manifest.json.
std::vector<SweepRow> run_sweep(const RunConfig& config, const std::filesystem::path& out, int workers);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;   // pass when value < limit; limit <= 0 marks an informational row
  bool informational() const { return limit <= 0.0; }
  bool pass() const { return informational() || value < limit; }
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool pass() const;
  std::string str() const;
};

/// Runs MPS, dense and Ehrenfest engines on identical realizations and
/// compares reduced states. Writes oracle.csv and manifest.json when `out` is non-empty.
OracleReport oracle_check(const RunConfig& config, const std::filesystem::path& out, int workers);

enum class Figure { WignerMap, DeltaVsTime, Scaling, ThermalCompare, OverlapScaling };

std::string figure_name(Figure f);
Figure parse_figure(const std::string& name);

/// Writes tables for one figure into `<run_dir>/figures/<name>/` with their own
/// manifest. Throws InvalidArgument when the run lacks a required quantity.
std::vector<std::filesystem::path> export_figure_data(const std::filesystem::path& run_dir, Figure figure);

}  // namespace htc
