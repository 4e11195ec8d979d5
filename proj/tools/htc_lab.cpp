#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "htc/cli_io.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  int workers = 0;
  std::string engine;
  std::optional<std::uint64_t> seed;
  std::string figure;
  std::string run_dir;
};

htc::RunConfig load(const Flags& f) {
  htc::Overrides o;
  if (!f.engine.empty()) o.engine = htc::parse_engine(f.engine);
  o.seed = f.seed;
  return htc::apply_overrides(htc::load_config(f.config), o);
}

void add_run_flags(CLI::App* cmd, Flags& f, bool out_required) {
  cmd->add_option("--config", f.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", f.out, "output directory");
  if (out_required) out->required();
  cmd->add_option("--workers", f.workers, "worker threads (HTC_WORKERS overrides)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--engine", f.engine, "mps, dense, ehrenfest or twa");
  cmd->add_option("--seed", f.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered Holstein-Tavis-Cummings simulation lab"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "run a disorder ensemble and write time series");
  add_run_flags(simulate, f, true);
  auto* sweep = app.add_subcommand("sweep", "end-time observables over N or W");
  add_run_flags(sweep, f, true);
  auto* oracle = app.add_subcommand("oracle-check", "compare MPS, dense and mean-field engines");
  add_run_flags(oracle, f, false);
  auto* figure = app.add_subcommand("export-figure-data", "write plot tables from a finished run");
  figure->add_option("--run", f.run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  figure->add_option("--figure", f.figure, "wigner_map, delta_vs_time, scaling, thermal_compare or overlap_scaling")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : htc::kExitSchema;
  }

  try {
    if (*simulate) {
      const htc::RunConfig c = load(f);
      const int workers = htc::cli_workers(f.workers);
      htc::simulate(c, f.out, workers);
      std::cout << "wrote " << f.out << "\n";
    } else if (*sweep) {
      const htc::RunConfig c = load(f);
      const int workers = htc::cli_workers(f.workers);
      htc::run_sweep(c, f.out, workers);
      std::cout << "wrote " << f.out << "\n";
    } else if (*oracle) {
      const htc::RunConfig c = load(f);
      const int workers = htc::cli_workers(f.workers);
      const htc::OracleReport report = htc::oracle_check(c, f.out, workers);
      std::cout << report.str();
      return report.pass() ? htc::kExitOk : htc::kExitCheckFailed;
    } else if (*figure) {
      for (const auto& p : htc::export_figure_data(f.run_dir, htc::parse_figure(f.figure))) std::cout << p.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return htc::exit_code_for(e);
  }
  return htc::kExitOk;
}
