#include "spinxfer/linalg.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>

namespace spinxfer {

SymmetricEigen symmetric_eigen(const MatrixXd& h) {
  if (h.rows() != h.cols()) throw SpinxferError("symmetric_eigen: matrix is not square");
  const auto n = static_cast<lapack_int>(h.rows());
  SymmetricEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  out.vectors = h;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                                         out.values.data());
  if (info != 0) throw SpinxferError("dsyevd failed with info " + std::to_string(info));
  return out;
}

MatrixXcd exp_minus_i(const SymmetricEigen& e, double t) {
  const auto n = e.values.size();
  VectorXcd phase(n);
  for (Eigen::Index j = 0; j < n; ++j) phase(j) = std::exp(-kI * (e.values(j) * t));
  const MatrixXcd v = e.vectors.cast<cplx>();
  return v * phase.asDiagonal() * v.transpose();
}

MatrixXcd exp_i_hermitian(const MatrixXcd& g) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
  if (es.info() != Eigen::Success) throw SpinxferError("exp_i_hermitian: decomposition failed");
  VectorXcd phase(g.rows());
  for (Eigen::Index j = 0; j < g.rows(); ++j) phase(j) = std::exp(kI * es.eigenvalues()(j));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

double unitarity_error(const MatrixXcd& u) {
  if (u.size() == 0) return 0.0;
  return (u * u.adjoint() - MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace spinxfer
