#pragma once

#include <vector>

#include "spinxfer/types.hpp"

namespace spinxfer {

/// Nearest-neighbour one-excitation eigensystem of the homogeneous chain.
/// lam_j = cos p_j; edge-localized modes have lam < -1 and p = pi + i kappa.
struct AnalyticChain {
  int n = 0;
  int n1 = 0;                    // size of the cosine family, n - floor(n/2)
  std::vector<cplx> p;
  VectorXd lam;
  VectorXd a;                    // 1/|cos- or sin-form column|, +inf when it vanishes identically
  MatrixXd u;                    // orthonormal columns, cosine family first

  /// Diagonal offset between the one-excitation block (D = 1) and lam.
  double shift() const { return 2.0 - 0.5 * (n - 1); }
};

/// Roots of the two families in lam = cos p, ascending within each family.
/// Cosine family first (n1 roots), then sine family.
std::vector<double> solve_lambda(int n);

/// Quasi-momenta p_j = arccos(lam_j), continued to p = pi + i acosh(-lam) below -1.
std::vector<cplx> solve_pj(int n);

AnalyticChain eigen_system(int n);

/// Printed normalization constant for a real quasi-momentum (sin p -> 0 taken as a limit).
double printed_normalization(int n, double p, bool cosine_family);

/// f(tau) = u diag(exp(-i lam tau)) u^T.
MatrixXcd transfer_amplitudes(const AnalyticChain& c, double tau);

struct AnalyticSenderState {
  double a00 = 0.0, a11 = 0.0, a22 = 0.0;
  cplx a12{};
  double residual = 0.0;   // of the re-evaluated self-consistency relations
  bool singular = false;
};

/// Sender sites 1, 2 and receiver sites n-1, n with a12 = rho_R12,
/// a22 = rho_R22, a00 = rho_R11 and unit trace.
AnalyticSenderState self_consistent_sender(const AnalyticChain& c, double tau);

struct SPoint {
  int n = 0;
  double s = 0.0;
  double tau0 = 0.0;
};

struct ScanSOptions {
  int points = 100000;
  double tau_min = 0.1;
  double window_exponent = 0.3;  // tau window upper limit 10^(window_exponent * n)
  bool refine = true;
};

SPoint scan_s(int n, const ScanSOptions& opt = {});

}  // namespace spinxfer
