#pragma once

#include <vector>

#include "spinxfer/evolution.hpp"
#include "spinxfer/solver.hpp"

namespace spinxfer {

/// Evolved columns of every sender configuration (popcount <= sender_kmax),
/// regrouped by the configuration of the non-receiver sites ("rest") and of
/// the receiver. Dense sender/receiver matrices are indexed by the integer
/// configuration of the subsystem, site 1 of the subsystem being bit 0.
class SenderChannel {
public:
  /// cols[k] holds the sector-k columns of the sender configurations with k
  /// excitations, in ascending configuration order.
  SenderChannel(const ExcitationBasis& basis, const Partition& part, int sender_kmax,
                const std::vector<MatrixXcd>& cols);

  static SenderChannel from_propagator(const BlockPropagator& u, const Partition& part, int sender_kmax);
  static SenderChannel from_spectrum(const SpectralHamiltonian& h, double tau, const Partition& part,
                                     int sender_kmax);

  /// Sender configurations of sector k, ascending.
  static std::vector<Config> sender_configs(int sender, int k);

  int sender_sites() const { return sender_; }
  int receiver_sites() const { return receiver_; }
  int sender_kmax() const { return kmax_; }
  int receiver_dim() const { return 1 << receiver_; }

  /// T_{N_R M_R; I J} for all receiver configurations (a 2^NR square matrix).
  MatrixXcd receiver_block(Config i, Config j) const;
  /// Receiver state produced by a dense 2^NS sender state.
  MatrixXcd apply(const MatrixXcd& rho_s) const;

private:
  int sender_ = 0;
  int receiver_ = 0;
  int kmax_ = 0;
  std::vector<int> slot_;         // sender configuration -> amplitude slot, -1 if absent
  std::vector<MatrixXcd> amp_;    // rest x receiver configuration
};

/// Four-index transfer tensor stored as receiver blocks per sender pair.
struct TransferTensor {
  int sender = 0;
  int receiver = 0;
  std::vector<MatrixXcd> blocks;  // index i * 2^NS + j

  const MatrixXcd& at(Config i, Config j) const { return blocks.at((i << sender) + j); }
  MatrixXcd apply(const MatrixXcd& rho_s) const;
};

TransferTensor transfer_tensor(const SenderChannel& ch);
TransferTensor transfer_tensor(const BlockPropagator& u, const Partition& part, int sender_kmax = 1);

/// U^(1) elements carrying a single excitation from sender site s to receiver
/// site r != s, ordered (r, s) with r major; real/imag stacked by the solver.
std::vector<cplx> restore_residuals(const BlockPropagator& u, const Partition& part);

struct LambdaFactors {
  VectorXcd lambda;   // lambda_{N_R, 0} per receiver site
  double tau = 0.0;
  Provenance provenance;

  /// lambda_{N_R, M_R} = lambda_{N_R,0} conj(lambda_{M_R,0}).
  cplx pair(int n, int m) const { return lambda(n) * std::conj(lambda(m)); }
  double min_abs() const { return lambda.size() ? lambda.cwiseAbs().minCoeff() : 0.0; }
};

LambdaFactors lambda_factors(const BlockPropagator& u, const Partition& part, double tau = 0.0);

struct RestoreOptions {
  int komega = 4;
  int controlled = 2;
  ModelKind model = ModelKind::StepWise;
  int trotter = 60;
  double eps = 1e-4;
  int trials = 100;
  std::uint64_t seed = 1;
  LmOptions lm;
  double dedupe_tol = 1e-6;
  Exec exec = Exec::Parallel;

  void validate(const Partition& part) const;
};

struct ControlSolution {
  int trial = 0;
  VectorXd angles;
  ControlSchedule schedule;
  double model_residual = 0.0;   // max |residual| of the model propagator
  double exact_residual = 0.0;   // same for the evolution the model approximates
  VectorXcd lambda_model;
  VectorXcd lambda_exact;
};

/// Model propagator for a schedule (exact_propagator semantics when the
/// schedule's model is Exact).
BlockPropagator schedule_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s, int max_sector = -1);

/// Multi-start LM over the sine-parametrized angles. Distinct converged
/// solutions ordered by (model residual, trial index).
std::vector<ControlSolution> solve_controls(const SpectralHamiltonian& h0, const Partition& part, double tau_reg,
                                            const RestoreOptions& opt);

struct RestorePoint {
  double tau = 0.0;
  int solutions = 0;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
  double lambda_model = 0.0;  // max over solutions of min_r |lambda|
  double lambda_exact = 0.0;  // exact-evolution counterpart for the same solution
};

struct RestoreMetrics {
  std::vector<RestorePoint> points;
  double tau0 = 0.0;
  double lambda_n = 0.0;
  std::vector<std::vector<ControlSolution>> ensembles;  // kept on request
};

/// S1, S2 and the lambda columns at one grid point; NaN when the ensemble is empty.
RestorePoint restore_point(double tau, const std::vector<ControlSolution>& sols);

/// Solves at every grid point and accumulates the running maxima S3, S4, S5.
RestoreMetrics s_metrics(const SpectralHamiltonian& h0, const Partition& part, const std::vector<double>& tau_grid,
                         const RestoreOptions& opt, bool keep_solutions = false);

/// C = 2|rho_12| for a 2-qubit (0,1)-excitation state in integer order.
double concurrence(const MatrixXcd& rho);

struct ConcurrencePoint {
  double tau = 0.0;
  double c_norm_model = 0.0;
  double c_norm_exact = 0.0;
  double discrepancy = 0.0;
};

ConcurrencePoint concurrence_transfer(const BlockPropagator& model, const BlockPropagator& exact,
                                      const Partition& part, const MatrixXcd& rho_s, double tau);

}  // namespace spinxfer
