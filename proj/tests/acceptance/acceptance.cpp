// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "htc/analysis.hpp"
#include "htc/dense.hpp"
#include "htc/ensemble.hpp"

using namespace htc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt("%.6g", v[i]);
  return s + "]";
}

HTCParams model(int n, double w) {
  HTCParams p;
  p.n_molecules = n;
  p.disorder_w = w;
  return p;
}

EnsembleConfig ensemble(Engine e, int nd, const HTCParams& p, std::vector<double> times) {
  EnsembleConfig c;
  c.engine = e;
  c.n_realizations = nd;
  c.master_seed = 20240601;
  c.sample_times = std::move(times);
  c.evolution = EvolutionConfig::defaults(p);
  c.evolution.chi_max = 64;
  c.evolution.throw_on_alarm = false;
  c.semiclassical.histogram = false;
  c.workers = 1;
  return c;
}

std::vector<double> uniform_times(double t_end, int n) {
  std::vector<double> t;
  for (int k = 0; k < n; ++k) t.push_back(t_end * k / (n - 1));
  return t;
}

// Invariants gathered over every run below.
struct Invariants {
  double norm = 0.0;
  double excitation = 0.0;
  double energy = 0.0;
  double min_delta = 0.0;
  double wigner_norm = 0.0;
  double overlap = 0.0;

  void add_run(const EnsembleResult& r) {
    for (const RealizationResult& k : r.realizations) {
      for (const auto& at_t : k.rho)
        for (const CMatrix& m : at_t) min_delta = std::min(min_delta, non_gaussianity(m));
      if (r.engine != Engine::Mps && r.engine != Engine::Dense) continue;
      const RealizationDiagnostics& d = k.diagnostics;
      norm = std::max(norm, d.norm_error);
      excitation = std::max(excitation, d.excitation_drift);
      energy = std::max(energy, d.energy_drift / std::max(std::abs(k.energy.front()), 1.0));
    }
    for (const CMatrix& m : r.xi_focus) add_state(m);
    for (const CMatrix& m : r.xi_avg) min_delta = std::min(min_delta, non_gaussianity(m));
  }

  void add_state(const CMatrix& m) {
    min_delta = std::min(min_delta, non_gaussianity(m));
    wigner_norm = std::max(wigner_norm, std::abs(wigner(m).integral() - 1.0));
  }

  void add_overlap(const CMatrix& a, const CMatrix& b, double o) {
    overlap = std::max(overlap, std::abs(o - (a * b).trace().real()));
  }
} inv;

double overlap(const CMatrix& a, const CMatrix& b) {
  const double o = wigner_overlap(wigner(a), wigner(b));
  inv.add_overlap(a, b, o);
  return o;
}

double final_focus_delta(const EnsembleResult& r) { return non_gaussianity(r.xi_focus.back()); }

void criterion1() {
  const auto t0 = Clock::now();
  HTCParams p = model(3, 0.5);
  p.n_max_vib = 6;
  EnsembleConfig c = ensemble(Engine::Mps, 1, p, {0.0, p.period()});
  c.evolution.trotter_order = 4;
  const EnsembleResult m = run_ensemble(c, p);
  c.engine = Engine::Dense;
  const EnsembleResult d = run_ensemble(c, p);
  inv.add_run(m);
  inv.add_run(d);
  double dist = 0.0;
  for (int i = 0; i < 3; ++i)
    dist = std::max(dist, trace_distance(m.realizations[0].rho.back()[i], d.realizations[0].rho.back()[i]));
  const double secs = seconds_since(t0);
  report(1, dist < 1e-6 && secs < 120.0,
         "MPS vs dense trace distance at 2pi/nu = " + fmt("%.3g", dist) + " (< 1e-6), runtime " + fmt("%.1f", secs) +
             " s (< 120 s)");
}

void criterion2() {
  HTCParams p = model(5, 0.0);
  p.huang_rhys_lambda = 0.0;
  const std::vector<double> times = uniform_times(p.period(), 201);
  auto rabi_error = [&](const EnsembleResult& r) {
    double e = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j)
      e = std::max(e, std::abs(r.realizations[0].photon_number[j] - std::pow(std::cos(times[j]), 2)));
    return e;
  };
  EnsembleConfig c = ensemble(Engine::Mps, 1, p, times);
  c.spec = InitialStateSpec::cavity();
  c.evolution.trotter_order = 4;
  const EnsembleResult m = run_ensemble(c, p);
  inv.add_run(m);

  HTCParams pd = p;
  pd.n_max_vib = 3;  // vibrations stay in their vacuum when lambda = 0
  EnsembleConfig cd = ensemble(Engine::Dense, 1, pd, times);
  cd.spec = InitialStateSpec::cavity();
  const EnsembleResult d = run_ensemble(cd, pd);
  inv.add_run(d);

  EnsembleConfig ct = c;
  ct.engine = Engine::Twa;
  ct.semiclassical.n_traj = 10000;
  const EnsembleResult t = run_ensemble(ct, p);
  inv.add_run(t);

  const double em = rabi_error(m), ed = rabi_error(d), et = rabi_error(t);
  const double twa_tol = 3.0 / std::sqrt(10000.0);
  report(2, em < 1e-6 && ed < 1e-6 && et < twa_tol,
         "max|<a^dag a> - cos^2(g_c t)|: MPS " + fmt("%.3g", em) + ", dense " + fmt("%.3g", ed) + " (< 1e-6); TWA " +
             fmt("%.3g", et) + " (< " + fmt("%.3g", twa_tol) + ")");
}

void criterion3() {
  HTCParams p = model(1, 0.0);
  p.g_collective = 0.0;
  p.n_max_vib = 12;
  const double t = M_PI / p.nu;
  const double target = 2.0 * std::sqrt(2.0) * 0.4;
  EnsembleConfig c = ensemble(Engine::Mps, 1, p, {0.0, t});
  const EnsembleResult m = run_ensemble(c, p);
  c.engine = Engine::Dense;
  const EnsembleResult d = run_ensemble(c, p);
  c.engine = Engine::Twa;
  c.semiclassical.n_traj = 10000;
  const EnsembleResult w = run_ensemble(c, p);
  inv.add_run(m);
  inv.add_run(d);
  inv.add_run(w);

  const CMatrix& rm = m.realizations[0].rho.back()[0];
  const CMatrix& rd = d.realizations[0].rho.back()[0];
  const double xm = covariance(rm).mean_x, xd = covariance(rd).mean_x;
  const TrajectorySample& s = w.realizations[0].trajectories.back();
  const MoleculeMoments mm = s.mean_moments(1);
  const double se = std::sqrt(std::max(0.0, mm.xx - mm.x * mm.x) / s.count);
  const double dm = non_gaussianity(rm), dd = non_gaussianity(rd);
  const bool pass = std::abs(xm - target) < 1e-6 && std::abs(xd - target) < 1e-6 && std::abs(mm.x - target) < 3.0 * se &&
                    dm < 1e-6 && dd < 1e-6;
  report(3, pass,
         "<x>(pi/nu) target " + fmt("%.7f", target) + ": MPS err " + fmt("%.3g", std::abs(xm - target)) + ", dense err " +
             fmt("%.3g", std::abs(xd - target)) + " (< 1e-6), TWA err " + fmt("%.3g", std::abs(mm.x - target)) +
             " (< 3 SE = " + fmt("%.3g", 3.0 * se) + "); delta MPS " + fmt("%.3g", dm) + ", dense " +
             fmt("%.3g", dd) + " (< 1e-6)");
}

CMatrix fock_dm(int n, int n_max) {
  CMatrix r = CMatrix::Zero(n_max + 1, n_max + 1);
  r(n, n) = 1.0;
  return r;
}

void criterion4() {
  const double vac = non_gaussianity(fock_dm(0, 20));
  double thermal = 0.0;
  for (double bn : {0.25, 1.0, 1.981, 4.0, 10.0})
    thermal = std::max(thermal, std::abs(non_gaussianity(thermal_state(bn / 0.3, 0.3, 120).density_matrix())));
  const double one = non_gaussianity(fock_dm(1, 20));
  inv.min_delta = std::min({inv.min_delta, vac, one});
  const bool pass = std::abs(vac) < 1e-12 && thermal < 1e-8 && std::abs(one - 2.0 * std::log(2.0)) < 1e-6;
  report(4, pass,
         "delta(vacuum) = " + fmt("%.3g", vac) + ", max |delta(thermal)| = " + fmt("%.3g", thermal) + " (< 1e-8), delta(|1>) - 2 ln 2 = " +
             fmt("%.3g", one - 2.0 * std::log(2.0)) + " (+- 1e-6)");
}

void criterion5() {
  const HTCParams p = model(1, 0.0);
  const ThermalReference t = thermal_reference(p.reorganization_energy(), p.nu, 120);
  const double bn = t.beta * p.nu;
  const CMatrix rho = t.density_matrix();
  double occ = 0.0;
  for (Index n = 0; n < rho.rows(); ++n) occ += static_cast<double>(n) * rho(n, n).real();
  const double p1 = thermal_state(4.0 / p.nu, p.nu, 120).populations(1);
  const bool pass = std::abs(bn - std::log(1.0 + 1.0 / 0.16)) < 1e-12 && std::abs(occ - 0.16) < 1e-10 && p1 < 0.02;
  report(5, pass,
         "beta_R nu = " + fmt("%.13f", bn) + " (ln(1 + 1/0.16) +- 1e-12), <n> = " + fmt("%.12f", occ) +
             " (0.16 +- 1e-10), p_1(beta nu = 4) = " + fmt("%.4f", p1) + " (< 0.02)");
}

// Disorder-free N scan at chi = 32, shared by criteria 6 and 9.
struct CleanScan {
  std::vector<double> n, delta, infidelity;
};

CleanScan criterion6() {
  const auto t0 = Clock::now();
  CleanScan s;
  for (int n : {4, 8, 16}) {
    const HTCParams p = model(n, 0.0);
    EnsembleConfig c = ensemble(Engine::Mps, 1, p, {p.period()});
    c.evolution.chi_max = 32;
    const EnsembleResult m = run_ensemble(c, p);
    inv.add_run(m);
    s.n.push_back(n);
    s.delta.push_back(final_focus_delta(m));
    c.engine = Engine::Ehrenfest;
    const EnsembleResult e = run_ensemble(c, p);
    inv.add_run(e);
    s.infidelity.push_back(1.0 - overlap(m.xi_focus.back(), e.xi_focus.back()));
  }
  const double secs = seconds_since(t0);
  bool decreasing = true;
  for (std::size_t k = 1; k < s.delta.size(); ++k) decreasing = decreasing && s.delta[k] < s.delta[k - 1];
  // least-squares slope of log delta against log N
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < s.n.size(); ++k) {
    mx += std::log(s.n[k]) / s.n.size();
    my += std::log(s.delta[k]) / s.n.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < s.n.size(); ++k) {
    sxy += (std::log(s.n[k]) - mx) * (std::log(s.delta[k]) - my);
    sxx += (std::log(s.n[k]) - mx) * (std::log(s.n[k]) - mx);
  }
  const double slope = sxy / sxx;
  report(6, decreasing && slope >= -1.5 && slope <= -0.5 && secs < 1800.0,
         "W=0 delta[xi_1](2pi/nu) over N={4,8,16} = " + list(s.delta) + " (strictly decreasing: " +
             (decreasing ? "yes" : "no") + "), log-log slope " + fmt("%.3f", slope) + " (in [-1.5, -0.5]), runtime " +
             fmt("%.0f", secs) + " s (< 1800 s)");
  return s;
}

// Disordered N scan at chi = 48, shared by criteria 7 and 9.
struct DisorderScan {
  double infidelity_disordered = 0.0;
  double infidelity_clean = 0.0;
};

DisorderScan criterion7() {
  const auto t0 = Clock::now();
  DisorderScan out;
  std::vector<double> dis, clean;
  double scatter_mean = 0.0, scatter_std = 0.0;
  for (int n : {8, 16, 32}) {
    const HTCParams p = model(n, 0.5);
    EnsembleConfig c = ensemble(Engine::Mps, 50, p, {p.period()});
    c.evolution.chi_max = 48;
    const EnsembleResult m = run_ensemble(c, p);
    inv.add_run(m);
    dis.push_back(final_focus_delta(m));

    const HTCParams p0 = model(n, 0.0);
    EnsembleConfig c0 = ensemble(Engine::Mps, 1, p0, {p0.period()});
    c0.evolution.chi_max = 48;
    const EnsembleResult m0 = run_ensemble(c0, p0);
    inv.add_run(m0);
    clean.push_back(final_focus_delta(m0));

    if (n == 16) {
      const std::vector<double> sc = m.focus_scatter(0);
      for (double d : sc) scatter_mean += d / sc.size();
      for (double d : sc) scatter_std += (d - scatter_mean) * (d - scatter_mean) / sc.size();
      scatter_std = std::sqrt(scatter_std);
      c.engine = Engine::Ehrenfest;
      const EnsembleResult e = run_ensemble(c, p);
      inv.add_run(e);
      out.infidelity_disordered = 1.0 - overlap(m.xi_focus.back(), e.xi_focus.back());
      c0.engine = Engine::Ehrenfest;
      const EnsembleResult e0 = run_ensemble(c0, p0);
      inv.add_run(e0);
      out.infidelity_clean = 1.0 - overlap(m0.xi_focus.back(), e0.xi_focus.back());
    }
  }
  const double secs = seconds_since(t0);
  const bool scatter = scatter_std > 0.1 * scatter_mean;
  const bool non_decreasing = dis[1] >= dis[0] && dis[2] >= dis[1];
  const bool clean_decreasing = clean[1] < clean[0] && clean[2] < clean[1];
  report(7, scatter && non_decreasing && clean_decreasing && secs < 7200.0,
         "N=16 scatter std/mean = " + fmt("%.3f", scatter_std / scatter_mean) + " (> 0.1); W=0.5 delta[xi_1] over N={8,16,32} = " +
             list(dis) + " (non-decreasing: " + (non_decreasing ? "yes" : "no") + "); W=0 = " + list(clean) +
             " (decreasing: " + (clean_decreasing ? "yes" : "no") + "); runtime " + fmt("%.0f", secs) + " s (< 7200 s)");
  return out;
}

void criterion8() {
  const HTCParams p = model(16, 0.5);
  EnsembleConfig c = ensemble(Engine::Twa, 50, p, uniform_times(p.period(), 11));
  c.semiclassical.n_traj = 20000;
  const EnsembleResult t = run_ensemble(c, p);
  inv.add_run(t);
  double worst = 0.0;
  for (const CMatrix& x : t.xi_focus) worst = std::max(worst, std::abs(non_gaussianity(x)));

  c.engine = Engine::Ehrenfest;
  const EnsembleResult e = run_ensemble(c, p);
  inv.add_run(e);
  double ehr = 0.0;
  for (const RealizationResult& r : e.realizations)
    for (const auto& at_t : r.rho)
      for (const CMatrix& m : at_t) ehr = std::max(ehr, std::abs(non_gaussianity(m)));
  report(8, worst < 0.02 && ehr < 1e-6,
         "TWA max_t |delta[xi_1]| = " + fmt("%.4f", worst) + " (< 0.02); Ehrenfest max per-realization delta = " +
             fmt("%.3g", ehr) + " (< 1e-6)");
}

void criterion9(const CleanScan& s, const DisorderScan& d) {
  bool decreasing = true;
  for (std::size_t k = 1; k < s.infidelity.size(); ++k) decreasing = decreasing && s.infidelity[k] < s.infidelity[k - 1];
  const double ratio = d.infidelity_disordered / d.infidelity_clean;
  report(9, decreasing && ratio >= 5.0,
         "W=0 Ehrenfest-vs-MPS 1-O_1 over N={4,8,16} = " + list(s.infidelity) + " (decreasing: " +
             (decreasing ? "yes" : "no") + "); N=16 disordered/clean = " + fmt("%.4g", d.infidelity_disordered) + "/" +
             fmt("%.4g", d.infidelity_clean) + " = " + fmt("%.2f", ratio) + " (>= 5)");
}

bool bitwise_equal(const EnsembleResult& a, const EnsembleResult& b) {
  auto same = [](const std::vector<CMatrix>& x, const std::vector<CMatrix>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j].rows() != y[j].rows() || x[j] != y[j]) return false;
    return true;
  };
  if (!same(a.xi_focus, b.xi_focus) || !same(a.xi_avg, b.xi_avg)) return false;
  for (std::size_t k = 0; k < a.realizations.size(); ++k)
    for (std::size_t j = 0; j < a.realizations[k].rho.size(); ++j)
      if (!same(a.realizations[k].rho[j], b.realizations[k].rho[j])) return false;
  return true;
}

void criterion10() {
  bool workers = true;
  for (Engine e : {Engine::Mps, Engine::Dense, Engine::Ehrenfest, Engine::Twa}) {
    HTCParams p = model(e == Engine::Dense ? 3 : 6, 0.5);
    if (e == Engine::Dense) p.n_max_vib = 5;
    EnsembleConfig c = ensemble(e, 6, p, uniform_times(p.period(), 3));
    c.semiclassical.n_traj = 3000;
    c.workers = 1;
    const EnsembleResult a = run_ensemble(c, p);
    c.workers = 4;
    const EnsembleResult b = run_ensemble(c, p);
    inv.add_run(a);
    workers = workers && bitwise_equal(a, b);
  }
  const bool pass = inv.norm < 1e-8 && inv.excitation < 1e-8 && inv.energy < 1e-4 && inv.min_delta >= -1e-8 &&
                    inv.wigner_norm < 1e-3 && inv.overlap < 1e-4 && workers;
  report(10, pass,
         "max norm error " + fmt("%.3g", inv.norm) + " (< 1e-8), excitation drift " + fmt("%.3g", inv.excitation) +
             " (< 1e-8), relative energy drift " + fmt("%.3g", inv.energy) + " (< 1e-4), min delta " +
             fmt("%.3g", inv.min_delta) + " (>= -1e-8), Wigner normalisation error " + fmt("%.3g", inv.wigner_norm) +
             " (< 1e-3), overlap-vs-trace error " + fmt("%.3g", inv.overlap) + " (< 1e-4), 1 vs 4 workers bitwise " +
             (workers ? "equal" : "different"));
}

template <class F>
auto guarded(int id, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    report(id, false, std::string("raised: ") + e.what());
    return decltype(f())();
  }
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  guarded(1, [] { criterion1(); });
  guarded(2, [] { criterion2(); });
  guarded(3, [] { criterion3(); });
  guarded(4, [] { criterion4(); });
  guarded(5, [] { criterion5(); });
  const CleanScan clean = guarded(6, [] { return criterion6(); });
  const DisorderScan disorder = guarded(7, [] { return criterion7(); });
  guarded(8, [] { criterion8(); });
  guarded(9, [&] { criterion9(clean, disorder); });
  guarded(10, [] { criterion10(); });
  std::printf("%s  %d of 10 criteria failed (%.0f s)\n", failures ? "FAIL" : "PASS", failures, seconds_since(t0));
  return failures ? 1 : 0;
}
