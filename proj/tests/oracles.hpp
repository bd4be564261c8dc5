#pragma once

// Independent reference implementations used only by the tests: dense
// Kronecker-product Hamiltonians, Pade matrix exponentials and full-space
// partial traces.

#include <random>

#include <Eigen/Sparse>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinxfer/evolution.hpp"

namespace oracle {

using spinxfer::cplx;
using spinxfer::MatrixXcd;
using spinxfer::MatrixXd;
using spinxfer::VectorXd;

inline MatrixXcd spin_op(char which) {
  MatrixXcd m(2, 2);
  switch (which) {
    case 'x': m << 0, 0.5, 0.5, 0; break;
    case 'y': m << 0, cplx(0, -0.5), cplx(0, 0.5), 0; break;
    case 'z': m << 0.5, 0, 0, -0.5; break;
    default: m = MatrixXcd::Identity(2, 2);
  }
  return m;
}

/// Operator acting as `ops[i]` on site i (site 0 is the least significant bit).
inline MatrixXcd site_product(int n, const std::vector<std::pair<int, char>>& ops) {
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (int site = n - 1; site >= 0; --site) {
    char which = 'i';
    for (const auto& [s, c] : ops)
      if (s == site) which = c;
    const MatrixXcd next = Eigen::kroneckerProduct(out, spin_op(which)).eval();
    out = next;
  }
  return out;
}

/// sum_{i<j} D_ij (XX + YY - 2 ZZ) + sum_i omega_i Z_i on the full 2^n space.
inline MatrixXcd full_hamiltonian(const MatrixXd& d, const VectorXd& omega) {
  const int n = static_cast<int>(d.rows());
  const Eigen::Index dim = Eigen::Index{1} << n;
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (d(i, j) == 0.0) continue;
      h += d(i, j) * (site_product(n, {{i, 'x'}, {j, 'x'}}) + site_product(n, {{i, 'y'}, {j, 'y'}}) -
                      2.0 * site_product(n, {{i, 'z'}, {j, 'z'}}));
    }
  for (int i = 0; i < omega.size(); ++i)
    if (omega(i) != 0.0) h += omega(i) * site_product(n, {{i, 'z'}});
  return h;
}

/// Sparse counterpart of full_hamiltonian for larger chains.
inline Eigen::SparseMatrix<cplx> full_hamiltonian_sparse(const MatrixXd& d, const VectorXd& omega) {
  using Sp = Eigen::SparseMatrix<cplx>;
  const int n = static_cast<int>(d.rows());
  auto op = [&](const std::vector<std::pair<int, char>>& ops) {
    Sp out(1, 1);
    out.insert(0, 0) = 1.0;
    for (int site = n - 1; site >= 0; --site) {
      char which = 'i';
      for (const auto& [s, c] : ops)
        if (s == site) which = c;
      const Sp m = spin_op(which).sparseView();
      Sp next = Eigen::kroneckerProduct(out, m);
      out = next;
    }
    return out;
  };
  const Eigen::Index dim = Eigen::Index{1} << n;
  Sp h(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (d(i, j) == 0.0) continue;
      h += d(i, j) * (op({{i, 'x'}, {j, 'x'}}) + op({{i, 'y'}, {j, 'y'}}) - 2.0 * op({{i, 'z'}, {j, 'z'}}));
    }
  for (int i = 0; i < omega.size(); ++i)
    if (omega(i) != 0.0) h += omega(i) * op({{i, 'z'}});
  return h;
}

/// Rows/columns of the full matrix restricted to the configurations of sector k.
inline MatrixXcd project(const MatrixXcd& full, const std::vector<spinxfer::Config>& sector) {
  const auto d = static_cast<Eigen::Index>(sector.size());
  MatrixXcd out(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      out(a, b) = full(static_cast<Eigen::Index>(sector[a]), static_cast<Eigen::Index>(sector[b]));
  return out;
}

/// exp(-i H t) by scaling and squaring with Pade approximants.
inline MatrixXcd pade_propagator(const MatrixXcd& h, double t) {
  const MatrixXcd a = (cplx(0, -t) * h).eval();
  return a.exp();
}

/// Full density matrix from sector blocks.
inline MatrixXcd embed(const spinxfer::BlockDensityMatrix& rho) {
  const int n = rho.basis->sites();
  const Eigen::Index dim = Eigen::Index{1} << n;
  MatrixXcd full = MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 0; k < rho.blocks.size(); ++k) {
    const auto& sec = rho.basis->sector(static_cast<int>(k));
    for (std::size_t a = 0; a < sec.size(); ++a)
      for (std::size_t b = 0; b < sec.size(); ++b)
        full(static_cast<Eigen::Index>(sec[a]), static_cast<Eigen::Index>(sec[b])) =
            rho.blocks[k](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return full;
}

/// Trace over the lowest `traced` sites of a full 2^n matrix.
inline MatrixXcd trace_out_low(const MatrixXcd& full, int n, int traced) {
  const Eigen::Index keep = Eigen::Index{1} << (n - traced), rest = Eigen::Index{1} << traced;
  MatrixXcd out = MatrixXcd::Zero(keep, keep);
  for (Eigen::Index q = 0; q < keep; ++q)
    for (Eigen::Index p = 0; p < keep; ++p)
      for (Eigen::Index r = 0; r < rest; ++r) out(q, p) += full(r + q * rest, r + p * rest);
  return out;
}

/// Random trace-1 positive matrix of dimension d.
inline MatrixXcd random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  MatrixXcd r = a * a.adjoint();
  return r / r.trace().real();
}

/// Random (0,1)-excitation state of `sites` qubits, dense in integer order.
inline MatrixXcd random_01_state(int sites, std::mt19937_64& rng) {
  std::vector<int> idx{0};
  for (int s = 0; s < sites; ++s) idx.push_back(1 << s);
  const MatrixXcd small = random_density(static_cast<int>(idx.size()), rng);
  const Eigen::Index dim = Eigen::Index{1} << sites;
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      out(idx[a], idx[b]) = small(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return out;
}

}  // namespace oracle
