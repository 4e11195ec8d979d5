#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "htc/model.hpp"
#include "oracles.hpp"

using namespace htc;

namespace {

HTCParams small(int n) {
  HTCParams p;
  p.n_molecules = n;
  p.n_max_vib = 3;
  p.disorder_w = 0.5;
  return p;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("derived quantities") {
  HTCParams p;
  p.n_molecules = 4;
  CHECK(p.coupling() == doctest::Approx(0.5));
  CHECK(p.reorganization_energy() == doctest::Approx(0.16 * 0.3));
  CHECK(p.period() == doctest::Approx(2.0 * kPi / 0.3));
  CHECK(p.molecule_dim() == 18);
}

TEST_CASE("validation rejects non-physical parameters") {
  HTCParams p;
  p.n_molecules = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = HTCParams{};
  p.n_max_vib = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = HTCParams{};
  p.disorder_w = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = HTCParams{};
  p.nu = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("Hamiltonian is Hermitian and conserves the excitation number") {
  for (int n : {1, 2, 3}) {
    const HTCParams p = small(n);
    const HamiltonianTerms t = build_terms(p, sample_disorder(p, 11));
    const CMatrix h = assemble_hamiltonian(t);
    const CMatrix q = total_excitation_operator(p);
    CHECK((h - h.adjoint()).norm() < 1e-13);
    CHECK((h * q - q * h).norm() < 1e-12);
  }
}

TEST_CASE("coupling term matches g (a^dag sigma^- + h.c.) element by element") {
  const HTCParams p = small(2);
  const HamiltonianTerms t = build_terms(p, sample_disorder(p, 1));
  const int dm = p.molecule_dim(), dv = p.vib_dim();
  const CMatrix& c = t.cavity_coupling[0];
  // |n=1, g, v> <-> |n=0, e, v>
  for (int v = 0; v < dv; ++v) {
    const Index photon = 1 * dm + v;
    const Index excited = 0 * dm + dv + v;
    CHECK(c(photon, excited).real() == doctest::Approx(p.coupling()));
    CHECK(c(excited, photon).real() == doctest::Approx(p.coupling()));
  }
  CHECK(c.cwiseAbs().sum() == doctest::Approx(2.0 * dv * p.coupling()));
}

TEST_CASE("excited-state potential is displaced by sqrt(2) lambda") {
  HTCParams p;
  p.n_max_vib = 30;
  const HamiltonianTerms t = build_terms(p, {0, {0.0}});
  const int dv = p.vib_dim();
  const CMatrix he = t.onsite[0].bottomRightCorner(dv, dv);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(he);
  // ground state of nu b^dag b - lambda nu (b + b^dag) is a coherent state at x = sqrt(2) lambda with energy -R
  CHECK(es.eigenvalues()(0) == doctest::Approx(-p.reorganization_energy()).epsilon(1e-10));
  const CVector g = es.eigenvectors().col(0);
  const CMatrix rho = g * g.adjoint();
  CHECK(oracle::moments_direct(rho).x == doctest::Approx(std::sqrt(2.0) * p.huang_rhys_lambda).epsilon(1e-10));
}

TEST_CASE("disorder draws") {
  HTCParams p;
  p.n_molecules = 6;
  p.disorder_w = 0.0;
  for (double e : sample_disorder(p, 5).epsilons) CHECK(e == 0.0);

  p.disorder_w = 1.0;
  const auto unit = sample_disorder(p, 5).epsilons;
  p.disorder_w = 0.37;
  const auto scaled = sample_disorder(p, 5).epsilons;
  for (std::size_t i = 0; i < unit.size(); ++i) CHECK(scaled[i] == doctest::Approx(0.37 * unit[i]).epsilon(1e-15));
  CHECK(sample_disorder(p, 5).epsilons == scaled);
  CHECK(sample_disorder(p, 6).epsilons != scaled);

  p.distribution = DisorderDistribution::Box;
  for (double e : sample_disorder(p, 9).epsilons) CHECK(std::abs(e) <= 0.37 / 2);
}

TEST_CASE("normal disorder passes a Kolmogorov-Smirnov test at the 1e-3 level") {
  HTCParams p;
  p.n_molecules = 100000;
  p.disorder_w = 1.0;
  std::vector<double> e = sample_disorder(p, 2024).epsilons;
  std::sort(e.begin(), e.end());
  const double n = static_cast<double>(e.size());
  double d = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double f = normal_cdf(e[k]);
    d = std::max({d, std::abs(f - k / n), std::abs((k + 1) / n - f)});
  }
  CHECK(d < 1.9495 / std::sqrt(n));  // asymptotic critical value for alpha = 1e-3
}

TEST_CASE("initial states") {
  const HTCParams p = small(3);
  const ProductState cav = initial_state(InitialStateSpec::cavity(), p);
  CHECK(std::abs(cav.cavity(1)) == doctest::Approx(1.0));
  for (const CVector& m : cav.molecules) CHECK(std::abs(m(0)) == doctest::Approx(1.0));
  const ProductState mol = initial_state(InitialStateSpec::molecule(2), p);
  CHECK(std::abs(mol.cavity(0)) == doctest::Approx(1.0));
  CHECK(std::abs(mol.molecules[1](p.vib_dim())) == doctest::Approx(1.0));
  CHECK(std::abs(mol.molecules[0](0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(initial_state(InitialStateSpec::molecule(4), p), InvalidArgument);

  const CVector full = oracle::product_vector(mol);
  const CMatrix q = total_excitation_operator(p);
  CHECK((full.adjoint() * q * full)(0, 0).real() == doctest::Approx(1.0));
}

TEST_CASE("thermal reference energy") {
  HTCParams p;
  p.n_molecules = 10;
  CHECK(thermal_reference_energy(InitialStateSpec::molecule(1), p) == doctest::Approx(p.reorganization_energy()));
  CHECK(thermal_reference_energy(InitialStateSpec::cavity(), p) == doctest::Approx(p.reorganization_energy() / 10));
}

TEST_CASE("build_terms rejects a realization of the wrong size") {
  const HTCParams p = small(3);
  CHECK_THROWS_AS(build_terms(p, {0, {0.0, 0.0}}), InvalidArgument);
}
