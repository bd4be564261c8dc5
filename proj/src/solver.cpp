#include "spinxfer/solver.hpp"

#include <cmath>

namespace spinxfer {

namespace {

MatrixXd fd_jacobian(const ResidualFn& f, const VectorXd& x, const VectorXd& r, double h) {
  MatrixXd j(r.size(), x.size());
  VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    j.col(i) = (f(xp) - r) / step;
    xp(i) = x(i);
  }
  return j;
}

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& f, VectorXd x0, const LmOptions& opt) {
  LmResult out;
  out.x = std::move(x0);
  out.residual = f(out.x);
  out.residual_inf = inf_norm(out.residual);
  double cost = out.residual.squaredNorm();
  double mu = opt.mu0;

  while (out.residual_inf >= opt.tol && out.iterations < opt.max_iterations) {
    ++out.iterations;
    const MatrixXd j = fd_jacobian(f, out.x, out.residual, opt.fd_step);
    const MatrixXd jtj = j.transpose() * j;
    const VectorXd g = j.transpose() * out.residual;
    const double scale = std::max(1.0, jtj.diagonal().maxCoeff());

    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      MatrixXd a = jtj;
      a.diagonal().array() += mu * scale;
      const VectorXd dx = a.ldlt().solve(-g);
      if (!dx.allFinite()) {
        mu *= 10.0;
        continue;
      }
      const VectorXd xn = out.x + dx;
      const VectorXd rn = f(xn);
      const double cn = rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        out.x = xn;
        out.residual = rn;
        out.residual_inf = inf_norm(rn);
        cost = cn;
        mu = std::max(mu / 3.0, 1e-15);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;  // stuck in a local minimum
  }
  out.converged = out.residual_inf < opt.tol;
  return out;
}

}  // namespace spinxfer
