#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinxfer/restoring.hpp"

namespace spinxfer {

/// Permutation swapping the all-ground and all-excited configurations of
/// n sites, identity elsewhere (integer configuration order).
MatrixXd exchange_unitary(int n);
/// Permutation swapping configurations a and b of n sites.
MatrixXd exchange_unitary(int n, Config a, Config b);

/// Block-diagonal (zero-order coherence) sender state; block k is indexed by
/// the sender configurations with k excitations in ascending order.
struct CoherenceState {
  int sender = 0;
  std::vector<MatrixXcd> blocks;

  int kmax() const { return static_cast<int>(blocks.size()) - 1; }
  double trace() const;
  double min_eigenvalue() const;
  /// Dense 2^sender matrix in integer order.
  MatrixXcd dense() const;
  /// Zero-order part of a dense state, sectors 0..kmax.
  static CoherenceState from_dense(const MatrixXcd& rho, int sender, int kmax);
};

/// Per-sector unitary on the extended receiver, U^(0) = 1.
struct ExtendedReceiverUnitary {
  int sites = 0;
  std::vector<MatrixXcd> blocks;  // sectors 0..kmax

  int kmax() const { return static_cast<int>(blocks.size()) - 1; }
  /// d_1^2 + ... + d_kmax^2 with d_k = C(sites, k).
  static int parameter_count(int sites, int kmax);
};

/// exp(i G(phi^(k))) per sector; the Hermitian generator takes the d
/// diagonal entries first, then (re, im) of each upper element row by row.
ExtendedReceiverUnitary er_unitary(const VectorXd& params, int sites, int kmax);

MatrixXcd hermitian_from_params(const double* p, int d);

/// Applies 1 (x) U_ER to sector-k columns of the whole chain.
MatrixXcd apply_er(const ExtendedReceiverUnitary& er, const ExcitationBasis& basis, const Partition& part, int k,
                   const MatrixXcd& cols);

/// Index of the entries (k, a, b) of a zero-order coherence state.
struct CoherenceLayout {
  struct Entry {
    int k, a, b;
  };
  int sender = 0;
  int kmax = 0;
  std::vector<std::vector<Config>> configs;
  std::vector<Entry> entries;
  std::vector<int> first;  // first entry of each sector

  CoherenceLayout(int sender, int kmax);
  int size() const { return static_cast<int>(entries.size()); }
  int index(int k, int a, int b) const { return first[k] + a * static_cast<int>(configs[k].size()) + b; }
  CoherenceState unpack(const VectorXcd& v) const;
  VectorXcd pack(const CoherenceState& s) const;
};

/// Matrix of the linear map from sender zero-order blocks to the receiver's.
MatrixXcd ptz_linear_map(const SenderChannel& ch, const CoherenceLayout& lay);

enum class PtzStatus { Ok, NonPositive, Singular, NotZeroed };
std::string to_string(PtzStatus s);

struct PtzResult {
  CoherenceState state;
  double delta_d = 0.0;
  double delta = 0.0;             // rect distance from the asymptotic state
  double tau = 0.0;
  double solve_residual = 0.0;
  double condition = 0.0;
  double zeroing_residual = 0.0;  // cut protocol only
  VectorXd er_params;             // cut protocol only
  PtzStatus status = PtzStatus::Ok;
};

/// Full sender state space: r^(i) = s^(i) for 0 < i < NS, r^(NS) = s^(0),
/// r^(0) = s^(NS), plus unit trace.
PtzResult ptz_full_solve(const SenderChannel& ch, double tau);
PtzResult ptz_full_solve(const SpectralHamiltonian& h, const Partition& part, double tau);

struct CutOptions {
  int kmax = 2;
  int restarts = 8;
  std::uint64_t seed = 1;
  double zero_tol = 1e-8;   // on the zeroed row norm
  LmOptions lm{1e-11, 400, 1e-7, 1e-3};
};

/// Cut sender state space with K = opt.kmax excitations: finds phi^(K) so the
/// receiver row of the first K receiver sites excited vanishes, then solves
/// with s^(K) = s_11 (+) s~ and s^(0) <-> s^(K)_11 exchanged.
PtzResult ptz_cut_solve(const SpectralHamiltonian& h, const Partition& part, double tau, const CutOptions& opt);

/// Linear step of the cut protocol for a given extended-receiver unitary
/// (parameters for sectors 1..kmax); zeroing_residual is filled in.
PtzResult ptz_cut_linear(const SpectralHamiltonian& h, const Partition& part, double tau, const VectorXd& er_params,
                         int kmax);

/// Sender-state columns of sectors 0..kmax with the extended-receiver unitary applied.
std::vector<MatrixXcd> er_columns(const SpectralHamiltonian& h, const Partition& part, double tau,
                                  const ExtendedReceiverUnitary& er, int kmax);

/// Receiver configuration whose row the cut protocol zeroes (first kmax receiver sites excited).
Config cut_target(int kmax);

/// Frobenius distance from diag(1, 0, ..., 0).
double rect_delta(const MatrixXcd& rho_r);

/// Receiver state before the exchange for a solved full-space state.
MatrixXcd pre_exchange_receiver(const CoherenceState& s);

enum class PtzProtocol { Full, Cut, Rect };
PtzProtocol parse_protocol(const std::string& s);
std::string to_string(PtzProtocol p);

struct TauOptimum {
  double value = 0.0;  // NaN when no point succeeded
  double tau0 = 0.0;
  double residual = 0.0;
  PtzStatus status = PtzStatus::Ok;
};

/// Objective of one protocol at one time: delta_d (full, cut) or delta (rect).
PtzResult ptz_point(const SpectralHamiltonian& h, const Partition& part, PtzProtocol protocol, double tau,
                    const CutOptions& cut);
double ptz_objective(const PtzResult& r, PtzProtocol protocol);

/// Coarse grid pass followed by Brent refinement around the best grid point.
TauOptimum optimize_tau(const SpectralHamiltonian& h, const Partition& part, PtzProtocol protocol,
                        const std::vector<double>& taus, const CutOptions& cut, bool refine = true,
                        Exec exec = Exec::Parallel);

/// Sectors a protocol needs from the chain Hamiltonian.
int ptz_sectors(const Partition& part, PtzProtocol protocol, const CutOptions& cut);

struct ScanSpec {
  GeometrySpec geometry;
  CouplingMode mode = CouplingMode::AngularDipolar;
  Partition part;
  PtzProtocol protocol = PtzProtocol::Full;
  std::string name1, name2;  // geometry keys: y0, chi, dy
  std::vector<double> values1, values2;
  std::vector<double> taus;
  CutOptions cut;
  bool refine = true;
  Exec exec = Exec::Parallel;
};

struct ScanCell {
  double p1 = 0.0, p2 = 0.0;
  TauOptimum best;
  std::string error;  // non-empty when the point failed
};

/// Grid over (values1 x values2), row-major in values1; failures are recorded per cell.
std::vector<ScanCell> scan_geometry(const ScanSpec& spec);

void set_geometry_param(GeometrySpec& g, const std::string& name, double value);

}  // namespace spinxfer
