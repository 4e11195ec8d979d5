#include "htc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "htc/fockspace.hpp"

namespace htc {

namespace {

RVector hermitian_eigenvalues(const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

CMatrix psd_sqrt(const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector w = es.eigenvalues();
  for (Index j = 0; j < w.size(); ++j) w(j) = w(j) > kEigenClip ? std::sqrt(w(j)) : 0.0;
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

void require_square(const CMatrix& rho, const char* what) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) throw InvalidArgument(std::string(what) + ": expected a square matrix");
}

RVector axis(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw InvalidArgument("grid needs at least two points and hi > lo");
  return RVector::LinSpaced(n, lo, hi);
}

}  // namespace

CovarianceSummary covariance(const CMatrix& rho) {
  require_square(rho, "covariance");
  const int n_max = static_cast<int>(rho.rows()) - 1;
  const QuadratureMoments q = quadrature_moments(std::max(n_max, 1));
  const Index d = rho.rows();
  auto ev = [&](const CMatrix& op) { return (rho * op.topLeftCorner(d, d)).trace().real(); };
  CovarianceSummary c;
  c.mean_x = ev(q.x);
  c.mean_p = ev(q.p);
  c.v_matrix(0, 0) = ev(q.xx) - c.mean_x * c.mean_x;
  c.v_matrix(1, 1) = ev(q.pp) - c.mean_p * c.mean_p;
  c.v_matrix(0, 1) = c.v_matrix(1, 0) = ev(q.xp_sym) - c.mean_x * c.mean_p;
  c.symplectic = std::sqrt(std::max(0.0, c.v_matrix.determinant()));
  return c;
}

double gaussian_entropy(double v) {
  v = std::max(v, 0.5);
  const double a = v + 0.5;
  const double b = v - 0.5;
  return a * std::log(a) - (b > 0.0 ? b * std::log(b) : 0.0);
}

double von_neumann_entropy(const CMatrix& rho) {
  require_square(rho, "entropy");
  const RVector w = hermitian_eigenvalues(rho);
  double s = 0.0;
  for (Index j = 0; j < w.size(); ++j)
    if (w(j) > kEigenClip) s -= w(j) * std::log(w(j));
  return s;
}

double purity(const CMatrix& rho) { return (rho * rho).trace().real(); }

double non_gaussianity(const CMatrix& rho) {
  const CovarianceSummary c = covariance(rho);
  if (c.symplectic < 0.5 - 1e-4)
    throw NumericalError("non-physical symplectic eigenvalue " + std::to_string(c.symplectic));
  return gaussian_entropy(c.symplectic) - von_neumann_entropy(rho);
}

double WignerGrid::dx() const { return x.size() > 1 ? x(1) - x(0) : 0.0; }
double WignerGrid::dp() const { return p.size() > 1 ? p(1) - p(0) : 0.0; }
double WignerGrid::integral() const { return w.sum() * dx() * dp(); }

bool WignerGrid::same_axes(const WignerGrid& o) const {
  return x.size() == o.x.size() && p.size() == o.p.size() && x == o.x && p == o.p;
}

WignerGrid make_grid(const GridSpec& spec) {
  WignerGrid g;
  g.x = axis(spec.x_min, spec.x_max, spec.nx);
  g.p = axis(spec.p_min, spec.p_max, spec.np);
  g.w = RMatrix::Zero(spec.nx, spec.np);
  return g;
}

CMatrix wigner_kernels(int n_max, double x, double p) {
  const int d = n_max + 1;
  const double r2 = x * x + p * p;
  const double u = 2.0 * r2;
  const double gauss = std::exp(-r2) / kPi;
  const Complex z = std::sqrt(2.0) * Complex(x, -p);
  CMatrix kern(d, d);
  // K(n+k, n) = (-1)^n sqrt(n!/(n+k)!) z^k e^{-r^2} L_n^{(k)}(2 r^2) / pi, z = sqrt2 (x - ip)
  Complex zk = 1.0;
  for (int k = 0; k < d; ++k) {
    double l_prev = 0.0;
    double l_cur = 1.0;
    double ratio = 1.0;
    for (int j = 1; j <= k; ++j) ratio /= std::sqrt(static_cast<double>(j));
    for (int n = 0; n + k < d; ++n) {
      if (n > 0) {
        const double l_next = ((2.0 * n - 1.0 + k - u) * l_cur - (n - 1 + k) * l_prev) / n;
        l_prev = l_cur;
        l_cur = l_next;
        ratio *= std::sqrt(static_cast<double>(n) / (n + k));
      }
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      const Complex v = gauss * sign * ratio * l_cur * zk;
      kern(n + k, n) = v;
      kern(n, n + k) = std::conj(v);
    }
    zk *= z;
  }
  return kern;
}

double wigner_at(const CMatrix& rho, double x, double p) {
  require_square(rho, "wigner");
  return rho.cwiseProduct(wigner_kernels(static_cast<int>(rho.rows()) - 1, x, p)).sum().real();
}

WignerGrid wigner(const CMatrix& rho, const GridSpec& spec) {
  require_square(rho, "wigner");
  if (rho.rows() - 1 > kHermiteMaxOrder) throw InvalidArgument("wigner: Fock cutoff too large");
  WignerGrid g = make_grid(spec);
  for (Index i = 0; i < g.x.size(); ++i)
    for (Index j = 0; j < g.p.size(); ++j) g.w(i, j) = wigner_at(rho, g.x(i), g.p(j));
  return g;
}

void check_wigner_normalization(const WignerGrid& w, double tolerance) {
  const double total = w.integral();
  if (std::abs(total - 1.0) > tolerance)
    throw NumericalError("Wigner grid too coarse or too small: integral " + std::to_string(total));
}

double wigner_overlap(const WignerGrid& a, const WignerGrid& b) {
  if (!a.same_axes(b)) throw InvalidArgument("wigner_overlap: grids differ");
  return 2.0 * kPi * a.w.cwiseProduct(b.w).sum() * a.dx() * a.dp();
}

double ThermalReference::mean_occupation() const { return 1.0 / std::expm1(beta * nu); }

CMatrix ThermalReference::density_matrix() const { return populations.cast<Complex>().asDiagonal(); }

ThermalReference thermal_state(double beta, double nu, int n_max) {
  if (!(beta > 0.0) || !(nu > 0.0)) throw InvalidArgument("thermal_state: beta and nu must be positive");
  if (n_max < 0) throw InvalidArgument("thermal_state: n_max must be non-negative");
  ThermalReference t;
  t.beta = beta;
  t.nu = nu;
  t.e0 = nu / std::expm1(beta * nu);
  const double q = std::exp(-beta * nu);
  t.populations = RVector(n_max + 1);
  double pn = 1.0 - q;
  for (int n = 0; n <= n_max; ++n) {
    t.populations(n) = pn;
    pn *= q;
  }
  t.tail = std::pow(q, n_max + 1);
  t.populations /= t.populations.sum();
  return t;
}

ThermalReference thermal_reference(double e0, double nu, int n_max) {
  if (!(e0 > 0.0)) throw InvalidArgument("thermal_reference: E0 must be positive");
  ThermalReference t = thermal_state(std::log1p(nu / e0) / nu, nu, n_max);
  t.e0 = e0;
  return t;
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  require_square(rho, "fidelity");
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw InvalidArgument("fidelity: shape mismatch");
  const CMatrix s = psd_sqrt(rho);
  const CMatrix m = s * sigma * s;
  const RVector w = hermitian_eigenvalues(m);
  double tr = 0.0;
  for (Index j = 0; j < w.size(); ++j)
    if (w(j) > 0.0) tr += std::sqrt(w(j));
  return std::clamp(tr * tr, 0.0, 1.0);
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("trace_distance: shape mismatch");
  return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

double SpectrumHeatmap::off_diagonal_mass() const { return magnitudes.sum() - magnitudes.diagonal().sum(); }

SpectrumHeatmap spectrum_and_heatmap(const CMatrix& rho) {
  require_square(rho, "spectrum");
  SpectrumHeatmap h;
  RVector w = hermitian_eigenvalues(rho).cwiseMax(0.0);
  std::sort(w.data(), w.data() + w.size(), std::greater<>());
  const double s = w.sum();
  if (s > 0.0) w /= s;
  h.eigenvalues = w;
  h.magnitudes = rho.cwiseAbs();
  return h;
}

CMatrix project_to_state(const CMatrix& rho) {
  require_square(rho, "project_to_state");
  const CMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector w = es.eigenvalues().cwiseMax(0.0);
  const double s = w.sum();
  if (!(s > 0.0)) throw NumericalError("project_to_state: no positive weight");
  w /= s;
  return es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

bool StateCheck::valid(double tol) const { return hermiticity < tol && trace_error < tol && min_eigenvalue > -tol; }

StateCheck check_state(const CMatrix& rho) {
  require_square(rho, "check_state");
  StateCheck c;
  c.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  c.trace_error = std::abs(rho.trace() - Complex(1.0));
  c.min_eigenvalue = hermitian_eigenvalues(rho).minCoeff();
  return c;
}

}  // namespace htc
