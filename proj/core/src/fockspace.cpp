#include "htc/fockspace.hpp"

#include <cmath>
#include <string>

namespace htc {

TruncatedOscillator ladder_matrices(int n_max) {
  if (n_max < 1) {
    throw InvalidArgument("ladder_matrices: n_max must be >= 1, got " + std::to_string(n_max));
  }
  TruncatedOscillator osc;
  osc.n_max = n_max;
  const Index d = n_max + 1;
  osc.b = CMatrix::Zero(d, d);
  for (Index n = 1; n < d; ++n) osc.b(n - 1, n) = std::sqrt(static_cast<double>(n));
  osc.b_dag = osc.b.adjoint();
  osc.number = osc.b_dag * osc.b;
  osc.x = (osc.b + osc.b_dag) / std::sqrt(2.0);
  osc.p = -kI * (osc.b - osc.b_dag) / std::sqrt(2.0);
  return osc;
}

QuadratureMoments quadrature_moments(int n_max) {
  const TruncatedOscillator big = ladder_matrices(n_max + 1);
  const Index d = n_max + 1;
  QuadratureMoments m;
  m.x = big.x.topLeftCorner(d, d);
  m.p = big.p.topLeftCorner(d, d);
  m.xx = (big.x * big.x).topLeftCorner(d, d);
  m.pp = (big.p * big.p).topLeftCorner(d, d);
  m.xp_sym = (0.5 * (big.x * big.p + big.p * big.x)).topLeftCorner(d, d);
  return m;
}

std::vector<double> hermite_psi_all(int n_max, double x) {
  if (n_max < 0) throw InvalidArgument("hermite_psi: order must be >= 0");
  if (n_max > kHermiteMaxOrder) {
    throw std::overflow_error("hermite_psi: order " + std::to_string(n_max) + " exceeds supported limit " +
                              std::to_string(kHermiteMaxOrder));
  }
  std::vector<double> psi(static_cast<std::size_t>(n_max) + 1);
  psi[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int k = 1; k < n_max; ++k) {
    psi[k + 1] = std::sqrt(2.0 / (k + 1)) * x * psi[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * psi[k - 1];
  }
  return psi;
}

double hermite_psi(int n, double x) { return hermite_psi_all(n, x).back(); }

}  // namespace htc
