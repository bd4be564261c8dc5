#pragma once

#include "spinxfer/types.hpp"

namespace spinxfer {

struct SymmetricEigen {
  VectorXd values;
  MatrixXd vectors;  // columns are eigenvectors
};

/// Eigen-decomposition of a real symmetric matrix (LAPACK dsyevd).
SymmetricEigen symmetric_eigen(const MatrixXd& h);

/// exp(-i H t) from a precomputed decomposition.
MatrixXcd exp_minus_i(const SymmetricEigen& e, double t);

/// exp(i G) for Hermitian G.
MatrixXcd exp_i_hermitian(const MatrixXcd& g);

/// max |U U^dagger - 1| over entries.
double unitarity_error(const MatrixXcd& u);

}  // namespace spinxfer
