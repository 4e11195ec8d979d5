#pragma once

#include <vector>

#include "htc/types.hpp"

namespace htc {

/// Eigenvalues below this are treated as zero in entropies and fidelities.
inline constexpr double kEigenClip = 1e-12;

struct CovarianceSummary {
  double mean_x = 0.0;
  double mean_p = 0.0;
  RMatrix v_matrix = RMatrix::Zero(2, 2);  // symmetrised covariance of (x, p)
  double symplectic = 0.5;                 // sqrt(det V)
};

/// First and second quadrature moments of a single-mode state in the Fock basis.
/// Second moments are taken in the untruncated space.
CovarianceSummary covariance(const CMatrix& rho);

/// (v + 1/2) ln(v + 1/2) - (v - 1/2) ln(v - 1/2), with v clamped to >= 1/2.
double gaussian_entropy(double symplectic);

double von_neumann_entropy(const CMatrix& rho);
double purity(const CMatrix& rho);

/// Entropy of the Gaussian state with the same covariance minus the entropy
/// of rho. Throws NumericalError if the symplectic eigenvalue is below 1/2 - 1e-4.
double non_gaussianity(const CMatrix& rho);

struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  double p_min = -5.0;
  double p_max = 5.0;
  int nx = 201;
  int np = 201;
};

struct WignerGrid {
  RVector x;
  RVector p;
  RMatrix w;  // w(ix, ip)

  double dx() const;
  double dp() const;
  /// Riemann sum of W over the grid.
  double integral() const;
  bool same_axes(const WignerGrid& other) const;
};

WignerGrid make_grid(const GridSpec& spec);

/// W(x, p) from closed-form Fock kernels (associated Laguerre polynomials).
WignerGrid wigner(const CMatrix& rho, const GridSpec& spec = {});
double wigner_at(const CMatrix& rho, double x, double p);

/// K with W_rho(x, p) = Re sum_ab rho_ab K_ab; K_ab is the Wigner function of |a><b|.
CMatrix wigner_kernels(int n_max, double x, double p);

/// Fails with NumericalError when the grid integral is off by more than `tolerance`.
void check_wigner_normalization(const WignerGrid& w, double tolerance = 1e-3);

/// 2 pi * integral of W1 W2 = tr(rho1 rho2). Throws InvalidArgument on mismatched grids.
double wigner_overlap(const WignerGrid& a, const WignerGrid& b);

struct ThermalReference {
  double beta = 0.0;
  double e0 = 0.0;
  double nu = 0.0;
  RVector populations;  // truncated to n_max and renormalised
  double tail = 0.0;    // untruncated weight above n_max

  /// Mean occupation of the untruncated thermal state, 1 / (e^{beta nu} - 1).
  double mean_occupation() const;
  CMatrix density_matrix() const;
};

/// beta_R = ln(1 + nu / E0) / nu, so that the untruncated mean energy nu <n> equals E0.
ThermalReference thermal_reference(double e0, double nu, int n_max);
ThermalReference thermal_state(double beta, double nu, int n_max);

/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const CMatrix& rho, const CMatrix& sigma);

double trace_distance(const CMatrix& a, const CMatrix& b);

struct SpectrumHeatmap {
  RVector eigenvalues;  // descending, clipped at zero, renormalised
  RMatrix magnitudes;   // |<n|rho|m>|
  double off_diagonal_mass() const;
};

SpectrumHeatmap spectrum_and_heatmap(const CMatrix& rho);

/// Hermitises, clips negative eigenvalues and renormalises to unit trace.
CMatrix project_to_state(const CMatrix& rho);

struct StateCheck {
  double hermiticity = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
  bool valid(double tol = 1e-8) const;
};

StateCheck check_state(const CMatrix& rho);

}  // namespace htc
