#include "htc/ensemble.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "htc/ehrenfest.hpp"
#include "htc/parallel.hpp"
#include "htc/rng.hpp"

namespace htc {

namespace {

CMatrix vib_from_site(const CMatrix& rho_site) {
  const Index dv = rho_site.rows() / 2;
  return rho_site.topLeftCorner(dv, dv) + rho_site.bottomRightCorner(dv, dv);
}

std::vector<double> effective_times(const EnsembleConfig& c, const HTCParams& p) {
  std::vector<double> t = c.sample_times;
  if (t.empty()) t = {0.0, p.period()};
  for (std::size_t j = 1; j < t.size(); ++j)
    if (t[j] < t[j - 1]) throw InvalidArgument("sample times must be ascending");
  if (t.front() < 0.0) throw InvalidArgument("sample times must be non-negative");
  return t;
}

void run_mps(const EnsembleConfig& c, const HTCParams& p, const DisorderRealization& real,
             const std::vector<double>& times, RealizationResult& out) {
  const HamiltonianTerms terms = build_terms(p, real);
  EvolutionConfig ev = c.evolution;
  if (ev.dt <= 0.0) ev.dt = p.period() / 400.0;
  ev.sample_times = times;
  ev.t_final = times.back();
  ev.ehrenfest_mode = false;
  MatrixProductState st = MatrixProductState::from_product(initial_state(c.spec, p), p);
  const double e0 = energy(st, terms);
  auto& d = out.diagnostics;
  const TebdDiagnostics td = evolve_tebd(st, terms, ev, [&](double, const MatrixProductState& s) {
    const std::vector<CMatrix> rhos = site_density_matrices(s);
    std::vector<CMatrix> vib(static_cast<std::size_t>(p.n_molecules));
    double photons = 0.0, exc = 0.0;
    for (int k = 0; k < s.num_sites(); ++k) {
      const CMatrix& r = rhos[static_cast<std::size_t>(k)];
      const auto& charge = s.site(k).phys_charge;
      for (Index a = 0; a < r.rows(); ++a) exc += r(a, a).real() * charge[static_cast<std::size_t>(a)];
      const int mol = s.site(k).molecule;
      if (mol == 0) {
        for (Index a = 0; a < r.rows(); ++a) photons += r(a, a).real() * static_cast<double>(a);
      } else {
        vib[static_cast<std::size_t>(mol - 1)] = vib_from_site(r);
      }
    }
    const double e = energy(s, terms);
    out.rho.push_back(std::move(vib));
    out.photon_number.push_back(photons);
    out.energy.push_back(e);
    d.norm_error = std::max(d.norm_error, std::abs(s.norm() - 1.0));
    d.energy_drift = std::max(d.energy_drift, std::abs(e - e0));
    d.excitation_drift = std::max(d.excitation_drift, std::abs(exc - 1.0));
  });
  d.truncation_weight = st.truncation_weight();
  d.max_step_truncation = st.max_step_truncation();
  d.max_bond_dim = td.max_bond_dim;
  d.alarms = td.alarms;
}

void run_dense(const EnsembleConfig& c, const HTCParams& p, const DisorderRealization& real,
               const std::vector<double>& times, RealizationResult& out) {
  const DenseSystem sys(p, real, c.spec.total_excitations(), c.dense);
  const DenseState s0 = sys.prepare(c.spec);
  const double e0 = sys.energy(s0);
  auto& d = out.diagnostics;
  for (const DenseState& s : sys.evolve(s0, times)) {
    std::vector<CMatrix> vib;
    for (int i = 1; i <= p.n_molecules; ++i) vib.push_back(dense_rdm(s, i));
    const double e = sys.energy(s);
    out.rho.push_back(std::move(vib));
    out.photon_number.push_back(sys.photon_number(s));
    out.energy.push_back(e);
    d.norm_error = std::max(d.norm_error, std::abs(s.amplitudes.norm() - 1.0));
    d.energy_drift = std::max(d.energy_drift, std::abs(e - e0));
    d.excitation_drift = std::max(d.excitation_drift, std::abs(sys.excitation_number(s) - 1.0));
  }
}

void run_ehrenfest(const EnsembleConfig& c, const HTCParams& p, const DisorderRealization& real,
                   const std::vector<double>& times, RealizationResult& out) {
  EvolutionConfig ev = c.evolution;
  if (ev.dt <= 0.0) ev.dt = p.period() / 400.0;
  ev.sample_times = times;
  ev.t_final = times.back();
  MeanFieldState st = mean_field_initial(c.spec, p);
  const double e0 = mean_field_energy(st, p, real.epsilons);
  auto& d = out.diagnostics;
  evolve_ehrenfest(st, p, real, ev, [&](double, const MeanFieldState& s) {
    std::vector<CMatrix> vib;
    for (int i = 1; i <= p.n_molecules; ++i) vib.push_back(mean_field_vibrational_dm(s, i, p.n_max_vib));
    const double e = mean_field_energy(s, p, real.epsilons);
    const double n2 = s.amplitudes.squaredNorm();
    out.rho.push_back(std::move(vib));
    out.photon_number.push_back(std::norm(s.amplitudes(0)));
    out.energy.push_back(e);
    d.norm_error = std::max(d.norm_error, std::abs(std::sqrt(n2) - 1.0));
    d.energy_drift = std::max(d.energy_drift, std::abs(e - e0));
    d.excitation_drift = std::max(d.excitation_drift, std::abs(n2 - 1.0));
  });
}

void run_twa(const EnsembleConfig& c, const HTCParams& p, const DisorderRealization& real,
             const std::vector<double>& times, RealizationResult& out) {
  SemiclassicalConfig sc = c.semiclassical;
  sc.sample_times = times;
  sc.seed = out.seed;
  if (c.n_realizations == 1) sc.workers = c.workers;
  else sc.workers = 1;
  if (c.spec.kind == InitialStateSpec::Kind::MoleculeExcited) sc.histogram_molecule = c.spec.index;
  SemiclassicalResult r = evolve_trajectories(p, real, c.spec, sc);
  for (const TrajectorySample& s : r.samples) {
    std::vector<CMatrix> vib;
    for (int i = 1; i <= p.n_molecules; ++i) vib.push_back(s.weyl[static_cast<std::size_t>(i - 1)].reconstruct(c.weyl_threshold));
    out.rho.push_back(std::move(vib));
    out.photon_number.push_back(s.mean_photon_weight());
    out.energy.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  out.diagnostics.energy_drift = r.max_energy_drift;
  out.diagnostics.spin_drift = r.max_spin_drift;
  out.trajectories = std::move(r.samples);
}

[[noreturn]] void rethrow_with_context(int k, std::uint64_t seed) {
  const std::string where = "realization " + std::to_string(k) + " (seed " + std::to_string(seed) + "): ";
  try {
    throw;
  } catch (const ResourceLimitError& e) {
    throw ResourceLimitError(where + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(where + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(where + e.what());
  }
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Mps: return "mps";
    case Engine::Dense: return "dense";
    case Engine::Ehrenfest: return "ehrenfest";
    case Engine::Twa: return "twa";
  }
  return "unknown";
}

Engine parse_engine(const std::string& name) {
  if (name == "mps") return Engine::Mps;
  if (name == "dense") return Engine::Dense;
  if (name == "ehrenfest") return Engine::Ehrenfest;
  if (name == "twa") return Engine::Twa;
  throw InvalidArgument("unknown engine '" + name + "' (expected mps, dense, ehrenfest or twa)");
}

std::uint64_t realization_seed(std::uint64_t master_seed, int k) {
  return stream_key(master_seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(StreamTag::Realization));
}

RealizationResult run_realization(const EnsembleConfig& c, const HTCParams& p, int k) {
  p.validate();
  RealizationResult out;
  out.index = k;
  out.seed = realization_seed(c.master_seed, k);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const DisorderRealization real = sample_disorder(p, out.seed);
    out.epsilons = real.epsilons;
    const std::vector<double> times = effective_times(c, p);
    switch (c.engine) {
      case Engine::Mps: run_mps(c, p, real, times, out); break;
      case Engine::Dense: run_dense(c, p, real, times, out); break;
      case Engine::Ehrenfest: run_ehrenfest(c, p, real, times, out); break;
      case Engine::Twa: run_twa(c, p, real, times, out); break;
    }
    out.diagnostics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } catch (...) {
    rethrow_with_context(k, out.seed);
  }
  return out;
}

CMatrix aggregate(const std::vector<CMatrix>& states, const std::vector<double>& weights) {
  if (states.empty() || states.size() != weights.size()) throw InvalidArgument("aggregate: need one weight per state");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("aggregate: weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw InvalidArgument("aggregate: weights must sum to 1");
  CMatrix out = CMatrix::Zero(states[0].rows(), states[0].cols());
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (states[j].rows() != out.rows() || states[j].cols() != out.cols()) throw InvalidArgument("aggregate: shape mismatch");
    out += weights[j] * states[j];
  }
  return out;
}

std::vector<double> EnsembleResult::focus_scatter(int j) const {
  std::vector<double> d;
  if (focus_molecule < 1) return d;
  for (const RealizationResult& r : realizations)
    d.push_back(non_gaussianity(r.rho[static_cast<std::size_t>(j)][static_cast<std::size_t>(focus_molecule - 1)]));
  return d;
}

EnsembleResult run_ensemble(const EnsembleConfig& c, const HTCParams& p) {
  p.validate();
  if (c.n_realizations < 1) throw InvalidArgument("n_realizations must be at least 1");
  EnsembleResult res;
  res.engine = c.engine;
  res.times = effective_times(c, p);
  res.focus_molecule = c.spec.kind == InitialStateSpec::Kind::MoleculeExcited ? c.spec.index : 0;
  res.realizations.resize(static_cast<std::size_t>(c.n_realizations));
  parallel_for(c.n_realizations, resolve_workers(c.workers),
               [&](int k) { res.realizations[static_cast<std::size_t>(k)] = run_realization(c, p, k); });

  const std::size_t nt = res.times.size();
  const int n = p.n_molecules;
  const double nd = c.n_realizations;
  for (std::size_t j = 0; j < nt; ++j) {
    if (c.engine == Engine::Twa) {
      // pool Weyl sums before the non-linear projection
      WeylAccumulator focus(p.n_max_vib), all(p.n_max_vib);
      for (const RealizationResult& r : res.realizations) {
        for (int i = 1; i <= n; ++i) {
          const WeylAccumulator& w = r.trajectories[j].weyl[static_cast<std::size_t>(i - 1)];
          all.merge(w);
          if (i == res.focus_molecule) focus.merge(w);
        }
      }
      if (res.focus_molecule > 0) res.xi_focus.push_back(focus.reconstruct(c.weyl_threshold));
      res.xi_avg.push_back(all.reconstruct(c.weyl_threshold));
      continue;
    }
    const Index dv = p.vib_dim();
    CMatrix focus = CMatrix::Zero(dv, dv), avg = CMatrix::Zero(dv, dv);
    for (const RealizationResult& r : res.realizations) {
      const auto& rr = r.rho[j];
      if (res.focus_molecule > 0) focus += rr[static_cast<std::size_t>(res.focus_molecule - 1)] / nd;
      CMatrix mol_sum = CMatrix::Zero(dv, dv);
      for (const CMatrix& m : rr) mol_sum += m;
      avg += mol_sum / (n * nd);
    }
    if (res.focus_molecule > 0) res.xi_focus.push_back(focus);
    res.xi_avg.push_back(avg);
  }
  return res;
}

std::vector<SweepRow> sweep(const EnsembleConfig& config, const HTCParams& params, const SweepConfig& sc) {
  if (sc.axis == SweepAxis::None) throw InvalidArgument("sweep: no axis selected");
  if (sc.values.empty()) throw InvalidArgument("sweep: empty value list");
  std::vector<SweepRow> rows;
  for (double v : sc.values) {
    HTCParams p = params;
    if (sc.axis == SweepAxis::MoleculeNumber) {
      if (v < 1.0 || v != std::floor(v)) throw InvalidArgument("sweep: molecule numbers must be positive integers");
      p.n_molecules = static_cast<int>(v);
    } else {
      p.disorder_w = v;
    }
    EnsembleConfig c = config;
    const double t_end = config.sample_times.empty() ? p.period() : config.sample_times.back();
    c.sample_times = {t_end};
    if (c.spec.kind == InitialStateSpec::Kind::MoleculeExcited && c.spec.index > p.n_molecules)
      throw InvalidArgument("sweep: initially excited molecule exceeds N");
    const EnsembleResult primary = run_ensemble(c, p);
    SweepRow row;
    row.value = v;
    row.n_molecules = p.n_molecules;
    row.disorder_w = p.disorder_w;
    if (primary.focus_molecule > 0) {
      row.delta_focus = non_gaussianity(primary.xi_focus.back());
      const std::vector<double> sc_d = primary.focus_scatter(0);
      double m = 0.0, m2 = 0.0;
      for (double d : sc_d) {
        m += d;
        m2 += d * d;
      }
      m /= static_cast<double>(sc_d.size());
      row.scatter_mean = m;
      row.scatter_std = std::sqrt(std::max(0.0, m2 / static_cast<double>(sc_d.size()) - m * m));
    }
    row.delta_avg = non_gaussianity(primary.xi_avg.back());
    for (const RealizationResult& r : primary.realizations)
      row.max_truncation = std::max(row.max_truncation, r.diagnostics.max_step_truncation);
    if (sc.compare && *sc.compare != c.engine) {
      EnsembleConfig cc = c;
      cc.engine = *sc.compare;
      const EnsembleResult other = run_ensemble(cc, p);
      if (primary.focus_molecule > 0) {
        row.infidelity_focus = 1.0 - wigner_overlap(wigner(primary.xi_focus.back(), sc.grid), wigner(other.xi_focus.back(), sc.grid));
        row.compare_delta_focus = non_gaussianity(other.xi_focus.back());
      }
      row.infidelity_avg = 1.0 - wigner_overlap(wigner(primary.xi_avg.back(), sc.grid), wigner(other.xi_avg.back(), sc.grid));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace htc
