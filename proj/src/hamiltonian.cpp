#include "spinxfer/hamiltonian.hpp"

#include <array>

namespace spinxfer {

namespace {

constexpr int kMaxSites = 62;

const std::array<std::array<std::uint64_t, kMaxSites + 2>, kMaxSites + 2>& binomial_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, kMaxSites + 2>, kMaxSites + 2> t{};
    for (int n = 0; n < kMaxSites + 2; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  return binomial_table()[n][k];
}

ExcitationBasis::ExcitationBasis(int n, int kmax) : n_(n), kmax_(kmax) {
  if (n < 1 || n > kMaxSites) throw SpinxferError("site count out of range");
  if (kmax < 0 || kmax > n) throw SpinxferError("kmax must satisfy 0 <= kmax <= n");
  sectors_.resize(kmax + 1);
  offsets_.assign(1, 0);
  const Config limit = Config{1} << n;
  for (int k = 0; k <= kmax; ++k) {
    auto& sec = sectors_[k];
    sec.reserve(binomial(n, k));
    if (k == 0) {
      sec.push_back(0);
    } else {
      // Gosper's hack enumerates k-subsets in ascending integer order.
      Config c = (Config{1} << k) - 1;
      while (c < limit) {
        sec.push_back(c);
        const Config u = c & (~c + 1);
        const Config v = c + u;
        c = v + (((v ^ c) / u) >> 2);
      }
    }
    offsets_.push_back(offsets_.back() + static_cast<int>(sec.size()));
  }
}

int ExcitationBasis::index_of(Config c) const {
  if (popcount(c) > kmax_ || (n_ < 64 && (c >> n_) != 0)) return -1;
  std::uint64_t rank = 0;
  int t = 1;
  while (c != 0) {
    const int pos = __builtin_ctzll(c);
    rank += binomial(pos, t);
    ++t;
    c &= c - 1;
  }
  return static_cast<int>(rank);
}

BasisPtr excitation_basis(int n, int kmax) { return std::make_shared<const ExcitationBasis>(n, kmax); }

Partition Partition::make(int n, int sender, int extended_receiver, int controlled) {
  Partition p;
  p.sender = sender;
  p.receiver = sender;
  p.transmission = n - 2 * sender;
  p.extended_receiver = extended_receiver < 0 ? sender : extended_receiver;
  p.controlled = controlled;
  p.validate();
  return p;
}

void Partition::validate() const {
  if (sender < 1) throw SpinxferError("partition: sender must have at least one site");
  if (receiver != sender) throw SpinxferError("partition: receiver size must equal sender size");
  if (transmission < 0) throw SpinxferError("partition: sender and receiver exceed the chain");
  if (extended_receiver < receiver || extended_receiver > receiver + transmission)
    throw SpinxferError("partition: extended receiver must lie between receiver and receiver+line");
  if (controlled < 0 || controlled > sites())
    throw SpinxferError("partition: controlled site count out of range");
}

VectorXd larmor_diagonal(const ExcitationBasis& basis, int k, const VectorXd& omega) {
  const auto& sec = basis.sector(k);
  VectorXd out = VectorXd::Zero(static_cast<Eigen::Index>(sec.size()));
  if (omega.size() == 0) return out;
  if (omega.size() != basis.sites()) throw SpinxferError("omega length must equal site count");
  const double total = omega.sum();
  for (std::size_t a = 0; a < sec.size(); ++a) {
    double excited = 0.0;
    for (Config c = sec[a]; c != 0; c &= c - 1) excited += omega(__builtin_ctzll(c));
    out(static_cast<Eigen::Index>(a)) = 0.5 * total - excited;
  }
  return out;
}

MatrixXd build_block(const CouplingMatrix& d, const VectorXd& omega, const ExcitationBasis& basis,
                     int k, Exec exec) {
  const int n = basis.sites();
  if (d.size() != n) throw SpinxferError("coupling matrix dimension does not match the basis");
  if (omega.size() != 0 && omega.size() != n) throw SpinxferError("omega length must equal site count");

  const auto& sec = basis.sector(k);
  const auto dim = static_cast<Eigen::Index>(sec.size());
  MatrixXd h = MatrixXd::Zero(dim, dim);

  // Ground-state ZZ energy: every pair contributes -D_ij/2; each pair with
  // exactly one excited site flips sign.
  double ground = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) ground -= 0.5 * d.d(i, j);
  const VectorXd larmor = larmor_diagonal(basis, k, omega);

  auto column = [&](Eigen::Index a) {
    const Config c = sec[static_cast<std::size_t>(a)];
    double diag = ground + larmor(a);
    for (int i = 0; i < n; ++i) {
      if (!((c >> i) & 1U)) continue;
      for (int j = 0; j < n; ++j) {
        if ((c >> j) & 1U) continue;
        const double dij = d.d(i, j);
        if (dij == 0.0) continue;
        diag += dij;  // (-1/2)(s_i s_j) changes from -1/2 to +1/2
        const Config flipped = c ^ (Config{1} << i) ^ (Config{1} << j);
        h(basis.index_of(flipped), a) += 0.5 * dij;
      }
    }
    h(a, a) += diag;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index a = 0; a < dim; ++a) column(a);
  } else {
    for (Eigen::Index a = 0; a < dim; ++a) column(a);
  }
  return h;
}

BlockHamiltonian build_blocks(const CouplingMatrix& d, const VectorXd& omega, BasisPtr basis,
                              Exec exec) {
  if (!basis) throw SpinxferError("null basis");
  BlockHamiltonian h;
  h.basis = basis;
  h.blocks.reserve(basis->sector_count());
  for (int k = 0; k < basis->sector_count(); ++k)
    h.blocks.push_back(build_block(d, omega, *basis, k, exec));
  return h;
}

}  // namespace spinxfer
