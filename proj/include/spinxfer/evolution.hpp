#pragma once

#include <vector>

#include "spinxfer/hamiltonian.hpp"
#include "spinxfer/linalg.hpp"

namespace spinxfer {

/// Block Hamiltonian together with the eigen-decomposition of each block,
/// so propagators on a time grid cost one basis change per point.
class SpectralHamiltonian {
public:
  /// Decomposes sectors 0..max_sector (all sectors when max_sector < 0).
  explicit SpectralHamiltonian(BlockHamiltonian h, int max_sector = -1, Exec exec = Exec::Parallel);

  const BlockHamiltonian& hamiltonian() const { return h_; }
  const ExcitationBasis& basis() const { return *h_.basis; }
  const BasisPtr& basis_ptr() const { return h_.basis; }
  int sector_count() const { return static_cast<int>(eig_.size()); }
  const SymmetricEigen& eigen(int k) const { return eig_.at(k); }

  /// exp(-i H^(k) tau).
  MatrixXcd propagator(int k, double tau) const;
  /// Selected columns of exp(-i H^(k) tau).
  MatrixXcd propagator_columns(int k, double tau, const std::vector<int>& cols) const;

private:
  BlockHamiltonian h_;
  std::vector<SymmetricEigen> eig_;
};

enum class ModelKind { Exact, StepWise, Pulse };

struct Provenance {
  ModelKind kind = ModelKind::Exact;
  int trotter = 0;     // StepWise
  double eps = 0.0;    // Pulse
};

/// exp(-iH tau) restricted to the excitation sectors; u0 is the 0-sector phase.
struct BlockPropagator {
  BasisPtr basis;
  std::vector<MatrixXcd> blocks;
  cplx u0{1.0, 0.0};
  Provenance provenance;

  int sector_count() const { return static_cast<int>(blocks.size()); }
  double max_unitarity_error() const;
};

BlockPropagator identity_propagator(BasisPtr basis, int max_sector = -1);

BlockPropagator exact_propagator(const SpectralHamiltonian& h, double tau, int max_sector = -1);

/// Piecewise-constant Larmor amplitudes on the last `controlled` sites over
/// `komega` equal intervals of [0, tau_reg]. Row r of `amplitudes` belongs to
/// site n - controlled + r + 1; every column sums to zero.
struct ControlSchedule {
  int komega = 1;
  double tau_reg = 0.0;
  int controlled = 0;
  MatrixXd amplitudes;           // controlled x komega
  ModelKind model = ModelKind::StepWise;
  int trotter = 1;               // StepWise
  double eps = 1e-4;             // Pulse: Delta tau^(2) / Delta tau^(1)

  /// Free angles (controlled-1 rows by komega columns, column-major) mapped to
  /// a = 2 sin(angle); the last controlled row is minus the sum of the others.
  static ControlSchedule from_angles(const VectorXd& angles, int controlled, int komega,
                                     double tau_reg, ModelKind model, int trotter, double eps);
  static int free_parameter_count(int controlled, int komega) { return (controlled - 1) * komega; }

  /// Larmor frequencies of all n sites on interval j.
  VectorXd omega(int n_sites, int interval) const;
  void validate() const;
};

/// Step-wise model: each interval is (exp(-i H0 dt/n) exp(-i Omega_j dt/n))^n.
BlockPropagator model1_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s,
                                  int max_sector = -1);

/// Pulse model: each interval is exp(-i H0 dt1) exp(-i Omega_j dt1), with
/// dt1 = tau_reg / (komega (1 + eps)) so the elapsed time including the
/// pulse subintervals eps*dt1 is tau_reg.
BlockPropagator model2_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s,
                                  int max_sector = -1);

/// Evolution the model approximates, at the same amplitudes:
///   StepWise: exp(-i (H0 + Omega_j) dt) per interval
///   Pulse:    exp(-i H0 dt1) exp(-i (H0 + Omega_j/eps) eps dt1) per interval
BlockPropagator controlled_exact_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s,
                                            int max_sector = -1);

/// Zero-order coherence density matrix stored sector by sector.
struct BlockDensityMatrix {
  BasisPtr basis;
  std::vector<MatrixXcd> blocks;

  double trace() const;
  /// Populations Tr rho^(k).
  std::vector<double> populations() const;
  /// Throws when a block is not Hermitian or has an eigenvalue below -tol.
  void validate(double tol = 1e-10) const;
  /// Dense matrix in excitation-sorted order.
  MatrixXcd dense() const;
  double min_eigenvalue() const;
};

BlockDensityMatrix ground_state_density(BasisPtr basis);

/// rho^(k) -> U^(k) rho^(k) U^(k)^dagger.
BlockDensityMatrix evolve_density(const BlockDensityMatrix& rho, const BlockPropagator& u);

/// Tr over sender and line sites; result lives on the receiver sites with
/// kmax = min(receiver, rho kmax).
BlockDensityMatrix partial_trace_receiver(const BlockDensityMatrix& rho, const Partition& part);

}  // namespace spinxfer
