#include "htc/krylov.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace htc {

namespace {

struct LanczosBasis {
  std::vector<CVector> vectors;
  RVector alpha;
  RVector beta;  // beta(j) couples vector j and j+1; beta(m-1) is the residual norm
  bool invariant = false;
};

LanczosBasis lanczos(const SparseHamiltonian& h, const CVector& start, int max_dim, KrylovStats* stats) {
  LanczosBasis basis;
  const int m_cap = static_cast<int>(std::min<Index>(max_dim, start.size()));
  basis.alpha = RVector::Zero(m_cap);
  basis.beta = RVector::Zero(m_cap);
  basis.vectors.push_back(start);
  const double scale = std::max(1.0, h.cwiseAbs().sum() / static_cast<double>(h.rows()));
  int m = 0;
  for (; m < m_cap; ++m) {
    CVector w = h * basis.vectors[static_cast<std::size_t>(m)];
    if (stats) ++stats->matvecs;
    // full reorthogonalisation, twice
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j <= m; ++j) {
        const Complex c = basis.vectors[static_cast<std::size_t>(j)].dot(w);
        if (pass == 0 && j == m) basis.alpha(m) = c.real();
        w -= c * basis.vectors[static_cast<std::size_t>(j)];
      }
    }
    const double b = w.norm();
    basis.beta(m) = b;
    if (b < 1e-13 * scale) {
      basis.invariant = true;
      ++m;
      break;
    }
    if (m + 1 < m_cap) basis.vectors.push_back(w / b);
  }
  if (m == m_cap && m_cap == start.size()) basis.invariant = true;
  basis.alpha.conservativeResize(m);
  basis.beta.conservativeResize(m);
  return basis;
}

}  // namespace

CVector expm_multiply(const SparseHamiltonian& h, const CVector& v, double t, const KrylovOptions& options,
                      KrylovStats* stats) {
  if (h.rows() != h.cols() || h.rows() != v.size()) throw InvalidArgument("expm_multiply: shape mismatch");
  if (t == 0.0 || v.size() == 0) return v;
  const double sign = t < 0.0 ? -1.0 : 1.0;
  const double total = std::abs(t);
  CVector psi = v;
  double done = 0.0;
  double tau_guess = total;
  while (done < total) {
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return psi;
    LanczosBasis basis = lanczos(h, psi / beta0, options.max_dim, stats);
    const auto m = static_cast<Index>(basis.alpha.size());
    RMatrix tri = RMatrix::Zero(m, m);
    for (Index j = 0; j < m; ++j) {
      tri(j, j) = basis.alpha(j);
      if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = basis.beta(j);
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(tri);
    const RVector& lam = eig.eigenvalues();
    const RMatrix& q = eig.eigenvectors();
    auto small_exp = [&](double tau) {
      CVector c(m);
      for (Index k = 0; k < m; ++k) c(k) = std::exp(-kI * (sign * tau * lam(k))) * q(0, k);
      return CVector(q.cast<Complex>() * c);
    };
    double tau = std::min(tau_guess, total - done);
    CVector coeffs;
    if (basis.invariant) {
      tau = total - done;
      coeffs = small_exp(tau);
    } else {
      for (int tries = 0;; ++tries) {
        coeffs = small_exp(tau);
        const double err = beta0 * basis.beta(m - 1) * std::abs(coeffs(m - 1));
        if (err <= options.tolerance * tau / total || tries > 60) break;
        tau *= 0.5;
      }
    }
    CVector next = CVector::Zero(psi.size());
    for (Index j = 0; j < m; ++j) next += coeffs(j) * basis.vectors[static_cast<std::size_t>(j)];
    psi = beta0 * next;
    done += tau;
    tau_guess = 2.0 * tau;
    if (stats) ++stats->substeps;
    if (!psi.allFinite()) throw NumericalError("expm_multiply: non-finite amplitudes");
  }
  return psi;
}

}  // namespace htc
