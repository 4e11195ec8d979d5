#include "oracles.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace oracle {

double hermite_psi_series(int n, double x) {
  // H_n(x) = n! sum_m (-1)^m (2x)^(n-2m) / (m! (n-2m)!)
  long double h = 0.0L;
  for (int m = 0; 2 * m <= n; ++m) {
    long double term = (m % 2 ? -1.0L : 1.0L) * std::pow(2.0L * x, n - 2 * m);
    term /= std::tgamma(static_cast<long double>(m + 1)) * std::tgamma(static_cast<long double>(n - 2 * m + 1));
    h += term;
  }
  h *= std::tgamma(static_cast<long double>(n + 1));
  const long double norm = std::sqrt(std::pow(2.0L, n) * std::tgamma(static_cast<long double>(n + 1)) *
                                     std::sqrt(static_cast<long double>(htc::kPi)));
  return static_cast<double>(h * std::exp(-0.5L * x * x) / norm);
}

double wigner_quadrature(const CMatrix& rho, double x, double p, int points, double y_max) {
  const int n = static_cast<int>(rho.rows());
  const double h = 2.0 * y_max / (points - 1);
  Complex sum = 0.0;
  for (int k = 0; k < points; ++k) {
    const double y = -y_max + k * h;
    Complex amp = 0.0;
    for (int a = 0; a < n; ++a) {
      const double pa = hermite_psi_series(a, x - y);
      for (int b = 0; b < n; ++b) amp += pa * rho(a, b) * hermite_psi_series(b, x + y);
    }
    const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    sum += w * amp * std::exp(Complex(0.0, 2.0 * p * y));
  }
  return (sum * h).real() / htc::kPi;
}

CMatrix fock(int n, int n_max) {
  CMatrix r = CMatrix::Zero(n_max + 1, n_max + 1);
  r(n, n) = 1.0;
  return r;
}

CMatrix coherent(Complex alpha, int n_max) {
  CVector v(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    v(n) = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(std::tgamma(n + 1.0));
  v.normalize();
  return v * v.adjoint();
}

CMatrix thermal(double nbar, int n_max) {
  CMatrix r = CMatrix::Zero(n_max + 1, n_max + 1);
  const double q = nbar / (1.0 + nbar);
  double z = 0.0;
  for (int n = 0; n <= n_max; ++n) z += std::pow(q, n);
  for (int n = 0; n <= n_max; ++n) r(n, n) = std::pow(q, n) / z;
  return r;
}

CMatrix random_state(int dim, int rank, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  CMatrix a(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = Complex(g(gen), g(gen));
  CMatrix r = a * a.adjoint();
  return r / r.trace().real();
}

CMatrix displaced(const CMatrix& rho, Complex alpha, int padding) {
  const int n = static_cast<int>(rho.rows());
  const int big = n + padding;
  CMatrix b = CMatrix::Zero(big, big);
  for (int k = 1; k < big; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
  // D = exp(alpha b^dag - alpha* b) = exp(-i K) with K Hermitian
  const CMatrix k = Complex(0.0, 1.0) * (alpha * b.adjoint() - std::conj(alpha) * b);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
  const CMatrix d = es.eigenvectors() *
                    (Complex(0.0, -1.0) * es.eigenvalues().cast<Complex>()).array().exp().matrix().asDiagonal() *
                    es.eigenvectors().adjoint();
  CMatrix padded = CMatrix::Zero(big, big);
  padded.topLeftCorner(n, n) = rho;
  CMatrix out = (d * padded * d.adjoint()).topLeftCorner(n, n);
  return out / out.trace().real();
}

CVector propagate_exact(const CMatrix& h, const CVector& v, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector c = es.eigenvectors().adjoint() * v;
  CVector phase(c.size());
  for (Index k = 0; k < c.size(); ++k) phase(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t)) * c(k);
  return es.eigenvectors() * phase;
}

CVector product_vector(const htc::ProductState& product) {
  CVector v = product.cavity;
  for (const CVector& m : product.molecules) {
    CVector next(v.size() * m.size());
    for (Index a = 0; a < v.size(); ++a) next.segment(a * m.size(), m.size()) = v(a) * m;
    v = next;
  }
  return v;
}

namespace {

// digit of site k (0 = cavity) in the mixed-radix full index
struct Layout {
  std::vector<Index> dims, strides;
};

Layout layout(const htc::HTCParams& p) {
  Layout l;
  l.dims.push_back(p.cavity_dim());
  for (int i = 0; i < p.n_molecules; ++i) l.dims.push_back(p.molecule_dim());
  l.strides.assign(l.dims.size(), 1);
  for (int k = static_cast<int>(l.dims.size()) - 2; k >= 0; --k) l.strides[k] = l.strides[k + 1] * l.dims[k + 1];
  return l;
}

}  // namespace

CMatrix vib_rdm_full(const CVector& psi, const htc::HTCParams& p, int molecule) {
  const Layout l = layout(p);
  const Index stride = l.strides[static_cast<std::size_t>(molecule)];
  const int dm = p.molecule_dim(), dv = p.vib_dim();
  CMatrix site = CMatrix::Zero(dm, dm);
  for (Index idx = 0; idx < psi.size(); ++idx) {
    const Index s = (idx / stride) % dm;
    const Index base = idx - s * stride;
    for (Index s2 = 0; s2 < dm; ++s2) site(s, s2) += psi(idx) * std::conj(psi(base + s2 * stride));
  }
  return site.topLeftCorner(dv, dv) + site.bottomRightCorner(dv, dv);
}

double photon_number_full(const CVector& psi, const htc::HTCParams& p) {
  const Layout l = layout(p);
  double n = 0.0;
  for (Index idx = 0; idx < psi.size(); ++idx) n += std::norm(psi(idx)) * static_cast<double>(idx / l.strides[0]);
  return n;
}

htc::MeanFieldState mean_field_rk4(htc::MeanFieldState s, const htc::HTCParams& params,
                                   const std::vector<double>& eps, double t, int steps) {
  const double h = t / steps;
  CVector k1a, k2a, k3a, k4a;
  std::vector<Complex> k1b, k2b, k3b, k4b;
  auto shifted = [&](const htc::MeanFieldState& base, const CVector& da, const std::vector<Complex>& db, double f) {
    htc::MeanFieldState r = base;
    r.amplitudes += f * da;
    for (std::size_t i = 0; i < r.alpha.size(); ++i) r.alpha[i] += f * db[i];
    return r;
  };
  for (int k = 0; k < steps; ++k) {
    htc::mean_field_rhs(s, params, eps, k1a, k1b);
    htc::mean_field_rhs(shifted(s, k1a, k1b, h / 2), params, eps, k2a, k2b);
    htc::mean_field_rhs(shifted(s, k2a, k2b, h / 2), params, eps, k3a, k3b);
    htc::mean_field_rhs(shifted(s, k3a, k3b, h), params, eps, k4a, k4b);
    s.amplitudes += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    for (std::size_t i = 0; i < s.alpha.size(); ++i) s.alpha[i] += h / 6 * (k1b[i] + 2.0 * k2b[i] + 2.0 * k3b[i] + k4b[i]);
  }
  s.time += t;
  return s;
}

Moments moments_direct(const CMatrix& rho) {
  // <b>, <b^2>, <b^dag b> from Fock sums; the last level has no partner above it
  const int n = static_cast<int>(rho.rows());
  Complex b = 0.0, b2 = 0.0;
  double nb = 0.0;
  for (int k = 1; k < n; ++k) b += std::sqrt(double(k)) * rho(k, k - 1);
  for (int k = 2; k < n; ++k) b2 += std::sqrt(double(k) * (k - 1)) * rho(k, k - 2);
  for (int k = 0; k < n; ++k) nb += k * rho(k, k).real();
  Moments m;
  m.x = std::sqrt(2.0) * b.real();
  m.p = std::sqrt(2.0) * b.imag();
  const double xx = nb + 0.5 + b2.real();
  const double pp = nb + 0.5 - b2.real();
  const double xp = b2.imag();
  m.vxx = xx - m.x * m.x;
  m.vpp = pp - m.p * m.p;
  m.vxp = xp - m.x * m.p;
  return m;
}

htc::TrajectoryState trajectory_rk4(htc::TrajectoryState st, const htc::HTCParams& params,
                                    const std::vector<double>& eps, double t, int steps) {
  const double h = t / steps;
  const std::size_t m = st.y.size();
  std::vector<double> k1, k2, k3, k4;
  htc::TrajectoryState tmp = st;
  for (int s = 0; s < steps; ++s) {
    htc::trajectory_rhs(st, params, eps, k1);
    for (std::size_t j = 0; j < m; ++j) tmp.y[j] = st.y[j] + 0.5 * h * k1[j];
    htc::trajectory_rhs(tmp, params, eps, k2);
    for (std::size_t j = 0; j < m; ++j) tmp.y[j] = st.y[j] + 0.5 * h * k2[j];
    htc::trajectory_rhs(tmp, params, eps, k3);
    for (std::size_t j = 0; j < m; ++j) tmp.y[j] = st.y[j] + h * k3[j];
    htc::trajectory_rhs(tmp, params, eps, k4);
    for (std::size_t j = 0; j < m; ++j) st.y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return st;
}

}  // namespace oracle
