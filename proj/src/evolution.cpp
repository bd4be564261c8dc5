#include "spinxfer/evolution.hpp"

#include <Eigen/Eigenvalues>

namespace spinxfer {

SpectralHamiltonian::SpectralHamiltonian(BlockHamiltonian h, int max_sector, Exec exec)
    : h_(std::move(h)) {
  const int count = (max_sector < 0) ? h_.sector_count() : std::min(max_sector + 1, h_.sector_count());
  eig_.resize(count);
  // Sectors differ wildly in size; dynamic scheduling keeps the big one from
  // serialising behind the small ones.
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < count; ++k) eig_[k] = symmetric_eigen(h_.blocks[k]);
  } else {
    for (int k = 0; k < count; ++k) eig_[k] = symmetric_eigen(h_.blocks[k]);
  }
}

MatrixXcd SpectralHamiltonian::propagator(int k, double tau) const {
  return exp_minus_i(eig_.at(k), tau);
}

MatrixXcd SpectralHamiltonian::propagator_columns(int k, double tau, const std::vector<int>& cols) const {
  const auto& e = eig_.at(k);
  const auto n = e.values.size();
  MatrixXcd rows(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (Eigen::Index j = 0; j < n; ++j)
      rows(j, static_cast<Eigen::Index>(c)) = std::exp(-kI * (e.values(j) * tau)) * e.vectors(cols[c], j);
  }
  return e.vectors.cast<cplx>() * rows;
}

double BlockPropagator::max_unitarity_error() const {
  double err = std::abs(std::abs(u0) - 1.0);
  for (const auto& b : blocks) err = std::max(err, unitarity_error(b));
  return err;
}

BlockPropagator identity_propagator(BasisPtr basis, int max_sector) {
  BlockPropagator u;
  const int count = (max_sector < 0) ? basis->sector_count() : std::min(max_sector + 1, basis->sector_count());
  for (int k = 0; k < count; ++k)
    u.blocks.push_back(MatrixXcd::Identity(basis->sector_size(k), basis->sector_size(k)));
  u.basis = std::move(basis);
  return u;
}

namespace {

int sectors_for(const SpectralHamiltonian& h, int max_sector) {
  return (max_sector < 0) ? h.sector_count() : std::min(max_sector + 1, h.sector_count());
}

MatrixXcd matrix_power(MatrixXcd base, int n) {
  MatrixXcd result = MatrixXcd::Identity(base.rows(), base.cols());
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

VectorXcd phases(const VectorXd& diag, double t) {
  VectorXcd out(diag.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i) out(i) = std::exp(-kI * (diag(i) * t));
  return out;
}

}  // namespace

BlockPropagator exact_propagator(const SpectralHamiltonian& h, double tau, int max_sector) {
  if (tau < 0.0) throw SpinxferError("propagation time must be non-negative");
  BlockPropagator u;
  u.basis = h.basis_ptr();
  const int count = sectors_for(h, max_sector);
  for (int k = 0; k < count; ++k) u.blocks.push_back(h.propagator(k, tau));
  u.u0 = u.blocks.at(0)(0, 0);
  u.provenance = {ModelKind::Exact, 0, 0.0};
  return u;
}

ControlSchedule ControlSchedule::from_angles(const VectorXd& angles, int controlled, int komega,
                                             double tau_reg, ModelKind model, int trotter, double eps) {
  if (controlled < 1) throw SpinxferError("schedule needs at least one controlled site");
  if (angles.size() != free_parameter_count(controlled, komega))
    throw SpinxferError("schedule: angle count does not match (controlled-1)*komega");
  ControlSchedule s;
  s.komega = komega;
  s.tau_reg = tau_reg;
  s.controlled = controlled;
  s.model = model;
  s.trotter = trotter;
  s.eps = eps;
  s.amplitudes = MatrixXd::Zero(controlled, komega);
  for (int j = 0; j < komega; ++j) {
    double sum = 0.0;
    for (int r = 0; r + 1 < controlled; ++r) {
      const double a = 2.0 * std::sin(angles(j * (controlled - 1) + r));
      s.amplitudes(r, j) = a;
      sum += a;
    }
    s.amplitudes(controlled - 1, j) = -sum;
  }
  s.validate();
  return s;
}

void ControlSchedule::validate() const {
  if (komega < 1) throw SpinxferError("schedule: komega must be positive");
  if (tau_reg < 0.0) throw SpinxferError("schedule: tau_reg must be non-negative");
  if (amplitudes.rows() != controlled || amplitudes.cols() != komega)
    throw SpinxferError("schedule: amplitude matrix has the wrong shape");
  for (int j = 0; j < komega; ++j)
    if (std::abs(amplitudes.col(j).sum()) > 1e-12)
      throw SpinxferError("schedule: Larmor amplitudes of an interval must sum to zero");
  if (model == ModelKind::StepWise && trotter < 1)
    throw SpinxferError("schedule: Trotter number must be at least 1");
  if (model == ModelKind::Pulse && !(eps > 0.0 && eps < 1.0))
    throw SpinxferError("schedule: pulse eps must lie in (0, 1)");
}

VectorXd ControlSchedule::omega(int n_sites, int interval) const {
  VectorXd w = VectorXd::Zero(n_sites);
  for (int r = 0; r < controlled; ++r) w(n_sites - controlled + r) = amplitudes(r, interval);
  return w;
}

BlockPropagator model1_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s, int max_sector) {
  s.validate();
  if (s.model != ModelKind::StepWise) throw SpinxferError("model1_propagator needs a step-wise schedule");
  const auto& basis = h0.basis();
  const double dt = s.tau_reg / s.komega / s.trotter;
  BlockPropagator u;
  u.basis = h0.basis_ptr();
  u.provenance = {ModelKind::StepWise, s.trotter, 0.0};
  const int count = sectors_for(h0, max_sector);
  for (int k = 0; k < count; ++k) {
    const MatrixXcd drift = h0.propagator(k, dt);
    MatrixXcd total = MatrixXcd::Identity(drift.rows(), drift.cols());
    for (int j = 0; j < s.komega; ++j) {
      const VectorXcd kick = phases(larmor_diagonal(basis, k, s.omega(basis.sites(), j)), dt);
      total = matrix_power(drift * kick.asDiagonal(), s.trotter) * total;
    }
    u.blocks.push_back(std::move(total));
  }
  u.u0 = u.blocks.at(0)(0, 0);
  return u;
}

BlockPropagator model2_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s, int max_sector) {
  s.validate();
  if (s.model != ModelKind::Pulse) throw SpinxferError("model2_propagator needs a pulse schedule");
  const auto& basis = h0.basis();
  const double dt1 = s.tau_reg / (s.komega * (1.0 + s.eps));
  BlockPropagator u;
  u.basis = h0.basis_ptr();
  u.provenance = {ModelKind::Pulse, 0, s.eps};
  const int count = sectors_for(h0, max_sector);
  for (int k = 0; k < count; ++k) {
    const MatrixXcd drift = h0.propagator(k, dt1);
    MatrixXcd total = MatrixXcd::Identity(drift.rows(), drift.cols());
    for (int j = 0; j < s.komega; ++j) {
      const VectorXcd pulse = phases(larmor_diagonal(basis, k, s.omega(basis.sites(), j)), dt1);
      total = drift * pulse.asDiagonal() * total;
    }
    u.blocks.push_back(std::move(total));
  }
  u.u0 = u.blocks.at(0)(0, 0);
  return u;
}

BlockPropagator controlled_exact_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s,
                                            int max_sector) {
  s.validate();
  const auto& basis = h0.basis();
  BlockPropagator u;
  u.basis = h0.basis_ptr();
  u.provenance = {ModelKind::Exact, 0, 0.0};
  const int count = sectors_for(h0, max_sector);
  const bool pulse = s.model == ModelKind::Pulse;
  const double dt = pulse ? s.tau_reg / (s.komega * (1.0 + s.eps)) : s.tau_reg / s.komega;
  for (int k = 0; k < count; ++k) {
    const MatrixXd& hk = h0.hamiltonian().blocks.at(k);
    const MatrixXcd drift = pulse ? h0.propagator(k, dt) : MatrixXcd();
    MatrixXcd total = MatrixXcd::Identity(hk.rows(), hk.cols());
    for (int j = 0; j < s.komega; ++j) {
      VectorXd diag = larmor_diagonal(basis, k, s.omega(basis.sites(), j));
      MatrixXd hj = hk;
      if (pulse) {
        hj.diagonal() += diag / s.eps;
        total = drift * exp_minus_i(symmetric_eigen(hj), s.eps * dt) * total;
      } else {
        hj.diagonal() += diag;
        total = exp_minus_i(symmetric_eigen(hj), dt) * total;
      }
    }
    u.blocks.push_back(std::move(total));
  }
  u.u0 = u.blocks.at(0)(0, 0);
  return u;
}

double BlockDensityMatrix::trace() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

std::vector<double> BlockDensityMatrix::populations() const {
  std::vector<double> p;
  for (const auto& b : blocks) p.push_back(b.trace().real());
  return p;
}

void BlockDensityMatrix::validate(double tol) const {
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw SpinxferError("density block " + std::to_string(k) + " is not Hermitian");
  }
  if (min_eigenvalue() < -tol) throw SpinxferError("density matrix is not positive semidefinite");
  if (std::abs(trace() - 1.0) > tol) throw SpinxferError("density matrix trace differs from 1");
}

double BlockDensityMatrix::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(b, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

MatrixXcd BlockDensityMatrix::dense() const {
  int total = 0;
  for (const auto& b : blocks) total += static_cast<int>(b.rows());
  MatrixXcd out = MatrixXcd::Zero(total, total);
  int off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += static_cast<int>(b.rows());
  }
  return out;
}

BlockDensityMatrix ground_state_density(BasisPtr basis) {
  BlockDensityMatrix rho;
  for (int k = 0; k < basis->sector_count(); ++k)
    rho.blocks.push_back(MatrixXcd::Zero(basis->sector_size(k), basis->sector_size(k)));
  rho.blocks[0](0, 0) = 1.0;
  rho.basis = std::move(basis);
  return rho;
}

BlockDensityMatrix evolve_density(const BlockDensityMatrix& rho, const BlockPropagator& u) {
  if (!rho.basis || !u.basis || rho.basis->sites() != u.basis->sites())
    throw SpinxferError("evolve_density: basis mismatch");
  if (u.sector_count() < static_cast<int>(rho.blocks.size()))
    throw SpinxferError("evolve_density: propagator lacks sectors present in the state");
  BlockDensityMatrix out;
  out.basis = rho.basis;
  for (std::size_t k = 0; k < rho.blocks.size(); ++k)
    out.blocks.push_back(u.blocks[k] * rho.blocks[k] * u.blocks[k].adjoint());
  return out;
}

BlockDensityMatrix partial_trace_receiver(const BlockDensityMatrix& rho, const Partition& part) {
  part.validate();
  const auto& basis = *rho.basis;
  if (basis.sites() != part.sites()) throw SpinxferError("partial trace: partition does not match the basis");
  const int nr = part.receiver;
  const int shift = part.receiver_offset();
  const Config rest_mask = (Config{1} << shift) - 1;
  const int kmax = std::min<int>(nr, static_cast<int>(rho.blocks.size()) - 1);
  auto rbasis = excitation_basis(nr, kmax);

  BlockDensityMatrix out;
  out.basis = rbasis;
  for (int k = 0; k <= kmax; ++k)
    out.blocks.push_back(MatrixXcd::Zero(rbasis->sector_size(k), rbasis->sector_size(k)));

  for (std::size_t k = 0; k < rho.blocks.size(); ++k) {
    const auto& sec = basis.sector(static_cast<int>(k));
    const auto& b = rho.blocks[k];
    for (std::size_t a = 0; a < sec.size(); ++a) {
      const Config ra = sec[a] & rest_mask;
      const Config qa = sec[a] >> shift;
      const int kr = popcount(qa);
      if (kr > kmax) continue;
      const int ia = rbasis->index_of(qa);
      for (std::size_t c = 0; c < sec.size(); ++c) {
        if ((sec[c] & rest_mask) != ra) continue;
        const int ic = rbasis->index_of(sec[c] >> shift);
        out.blocks[kr](ia, ic) += b(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
      }
    }
  }
  return out;
}

}  // namespace spinxfer
