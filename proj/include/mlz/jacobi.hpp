#pragma once

#include "mlz/model.hpp"

namespace mlz {

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // column k pairs with values(k)
  int sweeps = 0;
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Iterates until the
/// off-diagonal Frobenius norm drops below `tolerance * max(1, ||H||_F)`;
/// throws EigensolverNoConvergence after `max_sweeps` sweeps.
HermitianEigen jacobi_eigen(const CMatrix& h, double tolerance = 1e-12, int max_sweeps = 64);

} // namespace mlz
