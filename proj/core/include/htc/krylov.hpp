#pragma once

#include <Eigen/SparseCore>

#include "htc/types.hpp"

namespace htc {

using SparseHamiltonian = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct KrylovOptions {
  int max_dim = 40;
  double tolerance = 1e-12;  // error bound on the propagated vector over the full interval
};

struct KrylovStats {
  int substeps = 0;
  int matvecs = 0;
};

/// Lanczos approximation of exp(-i H t) v for Hermitian H with adaptive
/// substeps. The a-posteriori estimate per substep is kept below
/// tolerance * tau / t, so the accumulated error stays below `tolerance`.
CVector expm_multiply(const SparseHamiltonian& h, const CVector& v, double t, const KrylovOptions& options = {},
                      KrylovStats* stats = nullptr);

}  // namespace htc
