#include <cmath>

#include "doctest.h"
#include "htc/analysis.hpp"
#include "htc/dense.hpp"
#include "htc/ehrenfest.hpp"
#include "oracles.hpp"

using namespace htc;

namespace {

HTCParams params(int n, double w) {
  HTCParams p;
  p.n_molecules = n;
  p.disorder_w = w;
  return p;
}

double state_gap(const MeanFieldState& a, const MeanFieldState& b) {
  double d = (a.amplitudes - b.amplitudes).norm();
  for (std::size_t i = 0; i < a.alpha.size(); ++i) d = std::max(d, std::abs(a.alpha[i] - b.alpha[i]));
  return d;
}

MeanFieldState run(const HTCParams& p, const DisorderRealization& r, InitialStateSpec spec, double t, int order,
                   double dt) {
  EvolutionConfig c = EvolutionConfig::defaults(p);
  c.dt = dt;
  c.trotter_order = order;
  c.sample_times = {t};
  MeanFieldState s = mean_field_initial(spec, p);
  evolve_ehrenfest(s, p, r, c, nullptr);
  return s;
}

}  // namespace

TEST_CASE("gate integrator agrees with an RK4 solution of the mean-field equations") {
  const HTCParams p = params(4, 0.5);
  const DisorderRealization r = sample_disorder(p, 12);
  const double t = p.period();
  const MeanFieldState ref = oracle::mean_field_rk4(mean_field_initial(InitialStateSpec::molecule(1), p), p, r.epsilons, t, 40000);
  const MeanFieldState got = run(p, r, InitialStateSpec::molecule(1), t, 4, p.period() / 400);
  CHECK(state_gap(ref, got) < 1e-6);
}

TEST_CASE("second-order splitting converges quadratically") {
  const HTCParams p = params(3, 1.0);
  const DisorderRealization r = sample_disorder(p, 4);
  const double t = p.period() / 2;
  const MeanFieldState ref = oracle::mean_field_rk4(mean_field_initial(InitialStateSpec::cavity(), p), p, r.epsilons, t, 40000);
  const double e1 = state_gap(ref, run(p, r, InitialStateSpec::cavity(), t, 2, t / 200));
  const double e2 = state_gap(ref, run(p, r, InitialStateSpec::cavity(), t, 2, t / 400));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("norm and energy conservation, coherent-state Gaussianity") {
  HTCParams p = params(8, 0.5);
  const DisorderRealization r = sample_disorder(p, 77);
  EvolutionConfig c = EvolutionConfig::defaults(p);
  c.sample_times.clear();
  for (int k = 0; k <= 20; ++k) c.sample_times.push_back(p.period() * k / 20);
  MeanFieldState s = mean_field_initial(InitialStateSpec::molecule(1), p);
  const double e0 = mean_field_energy(s, p, r.epsilons);
  evolve_ehrenfest(s, p, r, c, [&](double, const MeanFieldState& st) {
    CHECK(std::abs(st.amplitudes.norm() - 1.0) < 1e-12);
    CHECK(std::abs(mean_field_energy(st, p, r.epsilons) - e0) < 1e-4);
    for (int i = 1; i <= p.n_molecules; ++i) {
      const CMatrix rho = mean_field_vibrational_dm(st, i, p.n_max_vib);
      CHECK(non_gaussianity(rho) < 1e-6);
      CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-12));
    }
  });
}

TEST_CASE("without vibronic coupling the mean-field photon number is exact") {
  HTCParams p = params(3, 0.5);
  p.huang_rhys_lambda = 0.0;
  p.n_max_vib = 2;
  const DisorderRealization r = sample_disorder(p, 6);
  const std::vector<double> times = {p.period() / 3, p.period()};
  EvolutionConfig c = EvolutionConfig::defaults(p);
  c.trotter_order = 4;
  c.sample_times = times;
  const DenseSystem sys(p, r, 1);
  const auto ds = sys.evolve(sys.prepare(InitialStateSpec::cavity()), times);
  MeanFieldState s = mean_field_initial(InitialStateSpec::cavity(), p);
  std::size_t j = 0;
  evolve_ehrenfest(s, p, r, c, [&](double, const MeanFieldState& st) {
    CHECK(std::abs(st.population(0) - sys.photon_number(ds[j])) < 1e-8);
    for (int i = 1; i <= 3; ++i) CHECK(std::abs(st.population(i) - sys.excited_population(ds[j], i)) < 1e-8);
    ++j;
  });
}

TEST_CASE("single uncoupled molecule follows the displaced oscillator") {
  HTCParams p = params(1, 0.0);
  p.g_collective = 0.0;
  p.n_max_vib = 12;
  const MeanFieldState s = run(p, sample_disorder(p, 0), InitialStateSpec::molecule(1), p.period() / 2, 2, p.period() / 400);
  CHECK(std::sqrt(2.0) * s.alpha[0].real() == doctest::Approx(2.0 * std::sqrt(2.0) * 0.4).epsilon(1e-12));
  CHECK(std::abs(s.alpha[0].imag()) < 1e-12);
}

TEST_CASE("coherent density matrix and truncation tail") {
  MeanFieldState s;
  s.amplitudes = CVector::Zero(2);
  s.alpha = {Complex(0.6, -0.3)};
  const CMatrix rho = mean_field_vibrational_dm(s, 1, 8);
  CHECK((rho - oracle::coherent(s.alpha[0], 8)).norm() < 1e-14);
  double tail = 0.0;
  const double a2 = std::norm(s.alpha[0]);
  for (int n = 9; n < 60; ++n) tail += std::exp(-a2) * std::pow(a2, n) / std::tgamma(n + 1.0);
  CHECK(coherent_truncation_tail(s.alpha[0], 8) == doctest::Approx(tail).epsilon(1e-6));
  CHECK_THROWS_AS(mean_field_vibrational_dm(s, 2, 8), InvalidArgument);
}
