#pragma once

#include <functional>

#include "spinxfer/types.hpp"

namespace spinxfer {

struct LmOptions {
  double tol = 1e-10;        // on the residual infinity norm
  int max_iterations = 200;
  double fd_step = 1e-7;
  double mu0 = 1e-3;
};

struct LmResult {
  VectorXd x;
  VectorXd residual;
  double residual_inf = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<VectorXd(const VectorXd&)>;

/// Levenberg-Marquardt with forward-difference Jacobian. Steps solve
/// (J^T J + mu I) dx = -J^T r, so any number of unknowns vs equations works.
LmResult levenberg_marquardt(const ResidualFn& f, VectorXd x0, const LmOptions& opt = {});

}  // namespace spinxfer
