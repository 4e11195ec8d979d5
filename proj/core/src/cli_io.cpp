#include "htc/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

#include "htc/parallel.hpp"

namespace htc {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct MomentRow {
  double delta, purity, v, mean_x, mean_p, vxx, vxp, vpp;
};

MomentRow moments(const CMatrix& rho) {
  const CovarianceSummary c = covariance(rho);
  return {non_gaussianity(rho), purity(rho), c.symplectic, c.mean_x, c.mean_p,
          c.v_matrix(0, 0), c.v_matrix(0, 1), c.v_matrix(1, 1)};
}

// Thermal state at reference energy e0; the zero-temperature limit is the vacuum.
CMatrix thermal_dm(double e0, double nu, int n_max, double* beta) {
  if (e0 > 0.0) {
    const ThermalReference t = thermal_reference(e0, nu, n_max);
    if (beta) *beta = t.beta;
    return t.density_matrix();
  }
  if (beta) *beta = std::numeric_limits<double>::infinity();
  CMatrix v = CMatrix::Zero(n_max + 1, n_max + 1);
  v(0, 0) = 1.0;
  return v;
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  double m2 = 0.0;
  for (double x : xs) {
    mean += x;
    m2 += x * x;
  }
  mean /= static_cast<double>(xs.size());
  sd = std::sqrt(std::max(0.0, m2 / static_cast<double>(xs.size()) - mean * mean));
}

CMatrix molecule_mean(const std::vector<CMatrix>& rhos) {
  CMatrix m = CMatrix::Zero(rhos[0].rows(), rhos[0].cols());
  for (const CMatrix& r : rhos) m += r;
  return m / static_cast<double>(rhos.size());
}

double relative_energy_drift(const RealizationResult& r, double g_c) {
  if (r.energy.empty() || !std::isfinite(r.energy.front())) return 0.0;
  return r.diagnostics.energy_drift / std::max(std::abs(r.energy.front()), g_c);
}

RunManifest base_manifest(const std::string& command, const RunConfig& config, int workers) {
  RunManifest m;
  m.command = command;
  m.config_json = serialize_config(config);
  m.config_hash = fnv1a_hex(m.config_json);
  m.engine = engine_name(config.engine);
  m.version = library_version();
  m.master_seed = config.master_seed;
  m.workers = workers;
  return m;
}

// Focus state label and matrices; cavity-excitation runs fall back to the molecule average.
struct FocusView {
  std::string label;
  const std::vector<CMatrix>* states;
};

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return kExitSchema;
  if (dynamic_cast<const ResourceLimitError*>(&e)) return kExitResource;
  return kExitEngine;
}

RunConfig apply_overrides(RunConfig config, const Overrides& o) {
  if (o.engine) config.engine = *o.engine;
  if (o.seed) config.master_seed = *o.seed;
  config.validate();
  return config;
}

int cli_workers(int flag_value) {
  if (const char* env = std::getenv(kWorkersEnv); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
    return static_cast<int>(n);
  }
  return resolve_workers(flag_value > 0 ? flag_value : 0);
}

EnsembleResult simulate(const RunConfig& config, const fs::path& out, int workers) {
  const auto t0 = Clock::now();
  const HTCParams& p = config.model;
  const EnsembleResult res = run_ensemble(config.ensemble_config(workers), p);
  const double period = p.period();
  const bool has_focus = res.focus_molecule > 0;
  const double e_focus = p.reorganization_energy();
  const double e_avg = p.reorganization_energy() / p.n_molecules;
  double beta_focus = 0.0, beta_avg = 0.0;
  const CMatrix th_focus = thermal_dm(e_focus, p.nu, p.n_max_vib, &beta_focus);
  const CMatrix th_avg = thermal_dm(e_avg, p.nu, p.n_max_vib, &beta_avg);

  CsvTable series({"time", "time_periods", "state", "delta", "purity", "symplectic_v", "mean_x", "mean_p", "V_xx", "V_xp",
                   "V_pp", "thermal_e0", "thermal_beta", "fidelity_thermal", "scatter_mean", "scatter_std",
                   "n_realizations"});
  CsvTable scatter({"time", "time_periods", "realization", "seed", "delta_focus", "delta_avg"});
  CsvTable observables({"time", "time_periods", "realization", "photon_number", "energy"});
  std::vector<StateRecord> records;

  for (std::size_t j = 0; j < res.times.size(); ++j) {
    const double t = res.times[j];
    const double tp = t / period;
    std::vector<double> d_focus, d_avg;
    for (const RealizationResult& r : res.realizations) {
      const double df = has_focus ? non_gaussianity(r.rho[j][static_cast<std::size_t>(res.focus_molecule - 1)])
                                  : std::numeric_limits<double>::quiet_NaN();
      const double da = non_gaussianity(molecule_mean(r.rho[j]));
      d_focus.push_back(df);
      d_avg.push_back(da);
      scatter.add({t, tp, static_cast<long long>(r.index), std::to_string(r.seed), df, da});
      observables.add({t, tp, static_cast<long long>(r.index), r.photon_number[j], r.energy[j]});
      if (has_focus)
        records.push_back({"rho_focus", t, static_cast<int>(j), r.index, res.focus_molecule,
                           r.rho[j][static_cast<std::size_t>(res.focus_molecule - 1)]});
    }
    auto add_series = [&](const std::string& label, const CMatrix& xi, const std::vector<double>& sc, double e0,
                          double beta, const CMatrix& th) {
      const MomentRow m = moments(xi);
      double sm = 0.0, ss = 0.0;
      mean_std(sc, sm, ss);
      series.add({t, tp, label, m.delta, m.purity, m.v, m.mean_x, m.mean_p, m.vxx, m.vxp, m.vpp, e0, beta,
                  fidelity(xi, th), sm, ss, static_cast<long long>(res.realizations.size())});
    };
    if (has_focus) {
      add_series("xi_focus", res.xi_focus[j], d_focus, e_focus, beta_focus, th_focus);
      records.push_back({"xi_focus", t, static_cast<int>(j), -1, res.focus_molecule, res.xi_focus[j]});
    }
    add_series("xi_avg", res.xi_avg[j], d_avg, e_avg, beta_avg, th_avg);
    records.push_back({"xi_avg", t, static_cast<int>(j), -1, 0, res.xi_avg[j]});
  }

  CsvTable diagnostics({"realization", "seed", "norm_error", "energy_drift", "relative_energy_drift",
                        "excitation_drift", "truncation_weight", "max_step_truncation", "max_bond_dim", "alarms",
                        "spin_drift"});
  RunManifest manifest = base_manifest("simulate", config, workers);
  double worst_norm = 0.0, worst_energy = 0.0, worst_exc = 0.0, worst_trunc = 0.0, total_alarms = 0.0, worst_spin = 0.0;
  double max_chi = 0.0;
  for (const RealizationResult& r : res.realizations) {
    const auto& d = r.diagnostics;
    const double rel = relative_energy_drift(r, p.g_collective);
    diagnostics.add({static_cast<long long>(r.index), std::to_string(r.seed), d.norm_error, d.energy_drift, rel,
                     d.excitation_drift, d.truncation_weight, d.max_step_truncation,
                     static_cast<long long>(d.max_bond_dim), static_cast<long long>(d.alarms), d.spin_drift});
    manifest.seeds.push_back(r.seed);
    worst_norm = std::max(worst_norm, d.norm_error);
    worst_energy = std::max(worst_energy, rel);
    worst_exc = std::max(worst_exc, d.excitation_drift);
    worst_trunc = std::max(worst_trunc, d.max_step_truncation);
    worst_spin = std::max(worst_spin, d.spin_drift);
    max_chi = std::max(max_chi, static_cast<double>(d.max_bond_dim));
    total_alarms += d.alarms;
  }

  fs::create_directories(out);
  series.write(out / "series.csv");
  scatter.write(out / "scatter.csv");
  observables.write(out / "observables.csv");
  diagnostics.write(out / "diagnostics.csv");
  write_states(out, "states", records);
  manifest.files = {"series.csv", "scatter.csv", "observables.csv", "diagnostics.csv", "states.bin", "states.json"};
  manifest.diagnostics = {{"max_norm_error", worst_norm},
                          {"max_relative_energy_drift", worst_energy},
                          {"max_excitation_drift", worst_exc},
                          {"max_step_truncation", worst_trunc},
                          {"truncation_alarms", total_alarms},
                          {"max_bond_dim", max_chi},
                          {"max_spin_drift", worst_spin},
                          {"n_realizations", static_cast<double>(res.realizations.size())},
                          {"n_traj", config.engine == Engine::Twa ? static_cast<double>(config.n_traj) : 0.0}};
  manifest.wall_seconds = seconds_since(t0);
  write_manifest(out, manifest);
  return res;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const fs::path& out, int workers) {
  if (config.sweep_axis == SweepAxis::None) throw ConfigError("config: the sweep command needs a 'sweep' section");
  const auto t0 = Clock::now();
  const std::vector<SweepRow> rows = sweep(config.ensemble_config(workers), config.model, config.sweep_config());

  const std::string axis = config.sweep_axis == SweepAxis::MoleculeNumber ? "n" : "w";
  CsvTable table({"axis", "point", "value", "n_molecules", "disorder_w", "statistic", "estimate"});
  double worst_trunc = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const SweepRow& r = rows[k];
    auto add = [&](const char* stat, double v) {
      table.add({axis, static_cast<long long>(k), r.value, static_cast<long long>(r.n_molecules), r.disorder_w,
                 std::string(stat), v});
    };
    add("delta_focus", r.delta_focus);
    add("delta_avg", r.delta_avg);
    add("scatter_mean", r.scatter_mean);
    add("scatter_std", r.scatter_std);
    add("max_step_truncation", r.max_truncation);
    if (config.sweep_compare) {
      add("infidelity_focus", r.infidelity_focus);
      add("infidelity_avg", r.infidelity_avg);
      add("compare_delta_focus", r.compare_delta_focus);
    }
    worst_trunc = std::max(worst_trunc, r.max_truncation);
  }
  fs::create_directories(out);
  table.write(out / "sweep.csv");
  RunManifest manifest = base_manifest("sweep", config, workers);
  for (int k = 0; k < config.n_realizations; ++k) manifest.seeds.push_back(realization_seed(config.master_seed, k));
  manifest.diagnostics = {{"max_step_truncation", worst_trunc}, {"points", static_cast<double>(rows.size())}};
  if (config.sweep_compare) manifest.engine += "+" + engine_name(*config.sweep_compare);
  manifest.files = {"sweep.csv"};
  manifest.wall_seconds = seconds_since(t0);
  write_manifest(out, manifest);
  return rows;
}

bool OracleReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.pass(); });
}

std::string OracleReport::str() const {
  std::ostringstream os;
  for (const OracleCheck& c : checks) {
    os << (c.informational() ? "INFO" : (c.pass() ? "PASS" : "FAIL")) << "  " << c.name << " = " << format_double(c.value);
    if (!c.informational()) os << "  (limit " << format_double(c.limit) << ")";
    os << '\n';
  }
  os << (pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

OracleReport oracle_check(const RunConfig& config, const fs::path& out, int workers) {
  const auto t0 = Clock::now();
  const HTCParams& p = config.model;
  EnsembleConfig ec = config.ensemble_config(workers);
  ec.evolution.trotter_order = config.trotter_order.value_or(4);
  ec.evolution.throw_on_alarm = false;

  EnsembleConfig dc = ec;
  dc.engine = Engine::Dense;
  const EnsembleResult dense = run_ensemble(dc, p);
  EnsembleConfig mc = ec;
  mc.engine = Engine::Mps;
  const EnsembleResult mps = run_ensemble(mc, p);
  EnsembleConfig hc = ec;
  hc.engine = Engine::Ehrenfest;
  const EnsembleResult mf = run_ensemble(hc, p);

  auto max_distance = [&](const EnsembleResult& a, const EnsembleResult& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.realizations.size(); ++k)
      for (std::size_t j = 0; j < a.times.size(); ++j)
        for (std::size_t i = 0; i < a.realizations[k].rho[j].size(); ++i)
          d = std::max(d, trace_distance(a.realizations[k].rho[j][i], b.realizations[k].rho[j][i]));
    for (std::size_t j = 0; j < a.times.size(); ++j) {
      d = std::max(d, trace_distance(a.xi_avg[j], b.xi_avg[j]));
      if (!a.xi_focus.empty()) d = std::max(d, trace_distance(a.xi_focus[j], b.xi_focus[j]));
    }
    return d;
  };
  auto max_photon_gap = [&](const EnsembleResult& a, const EnsembleResult& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.realizations.size(); ++k)
      for (std::size_t j = 0; j < a.times.size(); ++j)
        d = std::max(d, std::abs(a.realizations[k].photon_number[j] - b.realizations[k].photon_number[j]));
    return d;
  };
  auto worst = [&](const EnsembleResult& r, auto field) {
    double w = 0.0;
    for (const RealizationResult& x : r.realizations) w = std::max(w, field(x));
    return w;
  };

  OracleReport rep;
  const double tol = config.oracle_tolerance;
  rep.checks.push_back({"mps_vs_dense_trace_distance", max_distance(mps, dense), tol});
  rep.checks.push_back({"mps_vs_dense_photon_number", max_photon_gap(mps, dense), tol});
  rep.checks.push_back({"mps_norm_error", worst(mps, [](const RealizationResult& x) { return x.diagnostics.norm_error; }), 1e-8});
  rep.checks.push_back({"mps_excitation_drift", worst(mps, [](const RealizationResult& x) { return x.diagnostics.excitation_drift; }), 1e-8});
  rep.checks.push_back({"mps_relative_energy_drift",
                        worst(mps, [&](const RealizationResult& x) { return relative_energy_drift(x, p.g_collective); }), 1e-4});
  rep.checks.push_back({"dense_norm_error", worst(dense, [](const RealizationResult& x) { return x.diagnostics.norm_error; }), 1e-10});
  rep.checks.push_back({"dense_relative_energy_drift",
                        worst(dense, [&](const RealizationResult& x) { return relative_energy_drift(x, p.g_collective); }), 1e-10});
  rep.checks.push_back({"mps_max_step_truncation", worst(mps, [](const RealizationResult& x) { return x.diagnostics.max_step_truncation; }), 0.0});
  rep.checks.push_back({"mps_truncation_alarms", worst(mps, [](const RealizationResult& x) { return double(x.diagnostics.alarms); }), 0.0});
  rep.checks.push_back({"mps_max_bond_dim", worst(mps, [](const RealizationResult& x) { return double(x.diagnostics.max_bond_dim); }), 0.0});
  // product dynamics is exact only without vibronic coupling
  const double mf_limit = p.huang_rhys_lambda == 0.0 ? 1e-8 : 0.0;
  rep.checks.push_back({"ehrenfest_vs_dense_trace_distance", max_distance(mf, dense), mf_limit});
  rep.checks.push_back({"ehrenfest_vs_dense_photon_number", max_photon_gap(mf, dense), mf_limit});

  if (!out.empty()) {
    fs::create_directories(out);
    CsvTable table({"check", "value", "limit", "status"});
    for (const OracleCheck& c : rep.checks)
      table.add({c.name, c.value, c.limit, std::string(c.informational() ? "info" : (c.pass() ? "pass" : "fail"))});
    table.write(out / "oracle.csv");
    RunManifest manifest = base_manifest("oracle-check", config, workers);
    manifest.engine = "mps+dense+ehrenfest";
    for (const RealizationResult& r : dense.realizations) manifest.seeds.push_back(r.seed);
    for (const OracleCheck& c : rep.checks) manifest.diagnostics.emplace_back(c.name, c.value);
    manifest.diagnostics.emplace_back("trotter_order", ec.evolution.trotter_order);
    manifest.diagnostics.emplace_back("pass", rep.pass() ? 1.0 : 0.0);
    manifest.files = {"oracle.csv"};
    manifest.wall_seconds = seconds_since(t0);
    write_manifest(out, manifest);
  }
  return rep;
}

std::string figure_name(Figure f) {
  switch (f) {
    case Figure::WignerMap: return "wigner_map";
    case Figure::DeltaVsTime: return "delta_vs_time";
    case Figure::Scaling: return "scaling";
    case Figure::ThermalCompare: return "thermal_compare";
    case Figure::OverlapScaling: return "overlap_scaling";
  }
  return "unknown";
}

Figure parse_figure(const std::string& name) {
  for (Figure f : {Figure::WignerMap, Figure::DeltaVsTime, Figure::Scaling, Figure::ThermalCompare, Figure::OverlapScaling})
    if (figure_name(f) == name) return f;
  throw InvalidArgument("unknown figure '" + name +
                        "' (expected wigner_map, delta_vs_time, scaling, thermal_compare or overlap_scaling)");
}

std::vector<fs::path> export_figure_data(const fs::path& run_dir, Figure figure) {
  if (!fs::exists(run_dir / "manifest.json")) throw InvalidArgument("no manifest.json in " + run_dir.string());
  const RunManifest source = read_manifest(run_dir);
  const RunConfig config = parse_config(source.config_json);
  const HTCParams& p = config.model;
  const double period = p.period();
  const bool needs_sweep = figure == Figure::Scaling || figure == Figure::OverlapScaling;
  if (needs_sweep && source.command != "sweep")
    throw InvalidArgument(figure_name(figure) + " needs a sweep run, got '" + source.command + "'");
  if (!needs_sweep && source.command != "simulate")
    throw InvalidArgument(figure_name(figure) + " needs a simulate run, got '" + source.command + "'");

  const fs::path dir = run_dir / "figures" / figure_name(figure);
  fs::create_directories(dir);
  std::vector<std::string> files;

  if (needs_sweep) {
    const CsvData sweep_csv = read_csv(run_dir / "sweep.csv");
    const int c_point = sweep_csv.column("point"), c_stat = sweep_csv.column("statistic"), c_est = sweep_csv.column("estimate");
    std::vector<std::string> stats = figure == Figure::Scaling
                                         ? std::vector<std::string>{"delta_focus", "delta_avg", "scatter_mean", "scatter_std"}
                                         : std::vector<std::string>{"infidelity_focus", "infidelity_avg", "compare_delta_focus", "delta_focus"};
    std::vector<std::string> header = {"value", "n_molecules", "disorder_w"};
    header.insert(header.end(), stats.begin(), stats.end());
    CsvTable table(header);
    std::map<long long, std::map<std::string, std::string>> points;
    std::map<long long, std::vector<std::string>> keys;
    for (const auto& row : sweep_csv.rows) {
      const long long k = std::stoll(row[static_cast<std::size_t>(c_point)]);
      points[k][row[static_cast<std::size_t>(c_stat)]] = row[static_cast<std::size_t>(c_est)];
      keys[k] = {row[2], row[3], row[4]};
    }
    for (const auto& [k, stat] : points) {
      std::vector<CsvTable::Cell> cells = {std::stod(keys[k][0]), std::stoll(keys[k][1]), std::stod(keys[k][2])};
      for (const std::string& s : stats) {
        auto it = stat.find(s);
        if (it == stat.end())
          throw InvalidArgument(figure_name(figure) + ": run has no '" + s + "' column (sweep without a comparison engine?)");
        cells.emplace_back(std::stod(it->second));
      }
      table.add(std::move(cells));
    }
    table.write(dir / (figure_name(figure) + ".csv"));
    files.push_back(figure_name(figure) + ".csv");
  } else {
    const std::vector<StateRecord> records = read_states(run_dir, "states");
    std::vector<const StateRecord*> xi;
    for (const StateRecord& r : records)
      if (r.label == "xi_focus" || r.label == "xi_avg") xi.push_back(&r);

    if (figure == Figure::WignerMap) {
      CsvTable table({"time", "time_periods", "state", "x", "p", "W"});
      for (const StateRecord* r : xi) {
        const WignerGrid w = wigner(r->matrix, config.grid);
        for (Index ix = 0; ix < w.x.size(); ++ix)
          for (Index ip = 0; ip < w.p.size(); ++ip) table.add({r->time, r->time / period, r->label, w.x(ix), w.p(ip), w.w(ix, ip)});
      }
      table.write(dir / "wigner_map.csv");
      files.push_back("wigner_map.csv");
    } else if (figure == Figure::DeltaVsTime) {
      const CsvData series = read_csv(run_dir / "series.csv");
      CsvTable table({"time", "time_periods", "state", "delta", "scatter_mean", "scatter_std", "scatter_min", "scatter_max"});
      const CsvData scatter = read_csv(run_dir / "scatter.csv");
      const int s_time = scatter.column("time");
      for (const auto& row : series.rows) {
        const std::string& state = row[static_cast<std::size_t>(series.column("state"))];
        const std::string& time = row[static_cast<std::size_t>(series.column("time"))];
        const int col = scatter.column(state == "xi_focus" ? "delta_focus" : "delta_avg");
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& s : scatter.rows) {
          if (s[static_cast<std::size_t>(s_time)] != time) continue;
          const double d = std::stod(s[static_cast<std::size_t>(col)]);
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
        table.add({std::stod(time), std::stod(row[static_cast<std::size_t>(series.column("time_periods"))]), state,
                   std::stod(row[static_cast<std::size_t>(series.column("delta"))]),
                   std::stod(row[static_cast<std::size_t>(series.column("scatter_mean"))]),
                   std::stod(row[static_cast<std::size_t>(series.column("scatter_std"))]), lo, hi});
      }
      table.write(dir / "delta_vs_time.csv");
      CsvTable markers({"time", "time_periods", "realization", "delta_focus", "delta_avg"});
      for (const auto& s : scatter.rows)
        markers.add({std::stod(s[0]), std::stod(s[1]), std::stoll(s[2]), std::stod(s[4]), std::stod(s[5])});
      markers.write(dir / "delta_scatter.csv");
      files = {"delta_vs_time.csv", "delta_scatter.csv"};
    } else {
      CsvTable pops({"time", "time_periods", "state", "thermal_e0", "beta_r", "n", "thermal_population", "state_population",
                     "state_eigenvalue"});
      CsvTable heat({"time", "time_periods", "state", "n", "m", "magnitude"});
      CsvTable summary({"time", "time_periods", "state", "thermal_e0", "beta_r", "thermal_tail", "fidelity_thermal",
                        "off_diagonal_mass"});
      for (const StateRecord* r : xi) {
        const double e0 = r->label == "xi_focus" ? p.reorganization_energy() : p.reorganization_energy() / p.n_molecules;
        double beta = 0.0, tail = 0.0;
        const CMatrix th = thermal_dm(e0, p.nu, p.n_max_vib, &beta);
        if (e0 > 0.0) tail = thermal_reference(e0, p.nu, p.n_max_vib).tail;
        const SpectrumHeatmap sh = spectrum_and_heatmap(r->matrix);
        const double tp = r->time / period;
        for (Index n = 0; n < r->matrix.rows(); ++n)
          pops.add({r->time, tp, r->label, e0, beta, static_cast<long long>(n), th(n, n).real(), r->matrix(n, n).real(),
                    sh.eigenvalues(n)});
        for (Index n = 0; n < sh.magnitudes.rows(); ++n)
          for (Index m = 0; m < sh.magnitudes.cols(); ++m)
            heat.add({r->time, tp, r->label, static_cast<long long>(n), static_cast<long long>(m), sh.magnitudes(n, m)});
        summary.add({r->time, tp, r->label, e0, beta, tail, fidelity(r->matrix, th), sh.off_diagonal_mass()});
      }
      pops.write(dir / "thermal_populations.csv");
      heat.write(dir / "heatmap.csv");
      summary.write(dir / "thermal_summary.csv");
      files = {"thermal_populations.csv", "heatmap.csv", "thermal_summary.csv"};
    }
  }

  RunManifest m = source;
  m.command = "export-figure-data " + figure_name(figure);
  m.diagnostics.clear();
  m.wall_seconds = 0.0;
  m.files = files;
  write_manifest(dir, m);
  std::vector<fs::path> paths;
  for (const std::string& f : files) paths.push_back(dir / f);
  return paths;
}

}  // namespace htc
