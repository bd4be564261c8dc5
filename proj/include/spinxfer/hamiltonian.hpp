#pragma once

#include <memory>
#include <vector>

#include "spinxfer/lattice.hpp"
#include "spinxfer/types.hpp"

namespace spinxfer {

/// Configurations of an n-site chain grouped by excitation number k <= kmax.
/// Within a sector the order is ascending integer value (site 1 = bit 0).
class ExcitationBasis {
public:
  ExcitationBasis(int n, int kmax);

  int sites() const { return n_; }
  int kmax() const { return kmax_; }
  int sector_count() const { return kmax_ + 1; }
  int sector_size(int k) const { return static_cast<int>(sectors_.at(k).size()); }
  const std::vector<Config>& sector(int k) const { return sectors_.at(k); }

  /// Position of c inside its sector (colex rank); -1 when popcount(c) > kmax.
  int index_of(Config c) const;

  /// Offset of sector k in the concatenated excitation-sorted ordering.
  int offset(int k) const { return offsets_.at(k); }
  int total_size() const { return offsets_.back(); }

private:
  int n_;
  int kmax_;
  std::vector<std::vector<Config>> sectors_;
  std::vector<int> offsets_;
};

using BasisPtr = std::shared_ptr<const ExcitationBasis>;

BasisPtr excitation_basis(int n, int kmax);

std::uint64_t binomial(int n, int k);

/// Sizes of the sender / transmission line / receiver, the extended receiver
/// (receiver plus adjacent line sites) and the number of controlled sites.
/// Sender occupies the first sites, receiver and controlled sites the last.
struct Partition {
  int sender = 0;
  int transmission = 0;
  int receiver = 0;
  int extended_receiver = 0;
  int controlled = 0;

  int sites() const { return sender + transmission + receiver; }
  int receiver_offset() const { return sites() - receiver; }
  int extended_offset() const { return sites() - extended_receiver; }

  /// Builds a partition with receiver = sender and validates it.
  static Partition make(int n, int sender, int extended_receiver = -1, int controlled = 0);
  void validate() const;
};

/// Block-diagonal XXZ Hamiltonian H = diag(H^(0), H^(1), ...) in units of the
/// reference coupling. All couplings are real so every block is real symmetric.
struct BlockHamiltonian {
  BasisPtr basis;
  std::vector<MatrixXd> blocks;

  double h0scalar() const { return blocks.at(0)(0, 0); }
  int sector_count() const { return static_cast<int>(blocks.size()); }
};

/// Diagonal of sum_i omega_i Z_i on sector k (Z = diag(1/2, -1/2), ground first).
VectorXd larmor_diagonal(const ExcitationBasis& basis, int k, const VectorXd& omega);

/// H = sum_{i<j} D_ij (X_i X_j + Y_i Y_j - 2 Z_i Z_j) + sum_i omega_i Z_i with
/// X, Y, Z the spin-1/2 operators (Pauli / 2). omega may be empty (all zero).
BlockHamiltonian build_blocks(const CouplingMatrix& d, const VectorXd& omega, BasisPtr basis,
                              Exec exec = Exec::Parallel);

/// Single sector of build_blocks.
MatrixXd build_block(const CouplingMatrix& d, const VectorXd& omega, const ExcitationBasis& basis,
                     int k, Exec exec = Exec::Parallel);

}  // namespace spinxfer
