#pragma once

#include <vector>

#include "htc/types.hpp"

namespace htc {

/// Ladder-operator algebra of a harmonic oscillator truncated to |0>..|n_max>.
///
/// Quadratures follow x = (b + b^dag)/sqrt(2), p = -i (b - b^dag)/sqrt(2), so
/// [x, p] = i away from the truncation edge and the vacuum has variance 1/2.
struct TruncatedOscillator {
  int n_max = 0;
  CMatrix b;
  CMatrix b_dag;
  CMatrix number;
  CMatrix x;
  CMatrix p;

  Index dim() const { return n_max + 1; }
};

TruncatedOscillator ladder_matrices(int n_max);

/// Second moments <R_i R_j> of an operator supported on |0>..|n_max>, taken in
/// the untruncated space. Cropping x^2 computed in a space one level larger
/// gives <n|x^2|n> = n + 1/2 for every n <= n_max.
struct QuadratureMoments {
  CMatrix x;
  CMatrix p;
  CMatrix xx;
  CMatrix pp;
  CMatrix xp_sym;  // (xp + px)/2
};

QuadratureMoments quadrature_moments(int n_max);

/// Largest Fock index accepted by hermite_psi.
inline constexpr int kHermiteMaxOrder = 64;

/// Normalised oscillator eigenfunction psi_n(x) evaluated by the stable
/// three-term recurrence of the normalised functions.
double hermite_psi(int n, double x);

/// psi_0(x) .. psi_n_max(x) in one recurrence pass.
std::vector<double> hermite_psi_all(int n_max, double x);

}  // namespace htc
