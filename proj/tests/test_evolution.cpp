#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spinxfer/evolution.hpp"

using namespace spinxfer;

namespace {

CouplingMatrix chain_couplings(int n) {
  return coupling_matrix(build_geometry({GeometryKind::Linear, n}), CouplingMode::IsotropicDipolar);
}

SpectralHamiltonian spectrum(int n, int kmax) {
  return SpectralHamiltonian(build_blocks(chain_couplings(n), {}, excitation_basis(n, kmax)));
}

double max_diff(const BlockPropagator& a, const BlockPropagator& b) {
  double m = std::abs(a.u0 - b.u0);
  for (int k = 0; k < a.sector_count(); ++k) m = std::max(m, (a.blocks[k] - b.blocks[k]).cwiseAbs().maxCoeff());
  return m;
}

BlockDensityMatrix random_block_density(BasisPtr basis, std::mt19937_64& rng) {
  BlockDensityMatrix rho{basis, {}};
  for (int k = 0; k < basis->sector_count(); ++k) rho.blocks.push_back(oracle::random_density(basis->sector_size(k), rng));
  const double t = rho.trace();
  for (auto& b : rho.blocks) b /= t;
  return rho;
}

ControlSchedule random_schedule(int controlled, int komega, double tau, ModelKind model, int trotter, double eps,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  VectorXd angles(ControlSchedule::free_parameter_count(controlled, komega));
  for (auto& a : angles) a = u(rng);
  return ControlSchedule::from_angles(angles, controlled, komega, tau, model, trotter, eps);
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("zero time gives the identity") {
    const auto h = spectrum(6, 6);
    const auto u = exact_propagator(h, 0.0);
    CHECK(max_diff(u, identity_propagator(h.basis_ptr())) < 1e-14);
  }

  TEST_CASE("exact propagator matches the Pade exponential of the full Hamiltonian") {
    const int n = 6;
    const auto d = chain_couplings(n);
    const auto h = spectrum(n, n);
    const MatrixXcd full = oracle::full_hamiltonian(d.d, VectorXd::Zero(n));
    for (double tau : {0.7, 5.0, 23.0}) {
      const MatrixXcd ref = oracle::pade_propagator(full, tau);
      const auto u = exact_propagator(h, tau);
      CHECK(std::abs(u.u0 - ref(0, 0)) < 1e-10);
      for (int k = 1; k <= n; ++k)
        CHECK((oracle::project(ref, h.basis().sector(k)) - u.blocks[k]).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("group property and unitarity") {
    const auto h = spectrum(8, 3);
    for (double t1 : {0.3, 4.0})
      for (double t2 : {1.1, 17.0}) {
        const auto a = exact_propagator(h, t1), b = exact_propagator(h, t2), c = exact_propagator(h, t1 + t2);
        for (int k = 0; k <= 3; ++k) CHECK((a.blocks[k] * b.blocks[k] - c.blocks[k]).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(c.max_unitarity_error() < 1e-12);
      }
  }

  TEST_CASE("selected columns agree with the whole propagator") {
    const auto h = spectrum(7, 2);
    const MatrixXcd u = h.propagator(2, 3.3);
    const MatrixXcd c = h.propagator_columns(2, 3.3, {0, 4, 20});
    CHECK((c.col(0) - u.col(0)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((c.col(1) - u.col(4)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((c.col(2) - u.col(20)).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("serial and parallel spectra are identical") {
    const auto b = build_blocks(chain_couplings(10), {}, excitation_basis(10, 3));
    const SpectralHamiltonian s(b, -1, Exec::Serial), p(b, -1, Exec::Parallel);
    for (int k = 0; k <= 3; ++k) {
      CHECK((s.eigen(k).values - p.eigen(k).values).cwiseAbs().maxCoeff() == 0.0);
      CHECK((s.eigen(k).vectors - p.eigen(k).vectors).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("schedule columns sum to zero and the last rows carry the control") {
    std::mt19937_64 rng(3);
    const auto s = random_schedule(3, 4, 10.0, ModelKind::StepWise, 5, 0.0, rng);
    CHECK(s.amplitudes.rows() == 3);
    CHECK(s.amplitudes.cols() == 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(s.amplitudes.col(j).sum()) < 1e-14);
      const VectorXd w = s.omega(8, j);
      CHECK(w.head(5).cwiseAbs().maxCoeff() == 0.0);
      CHECK((w.tail(3) - s.amplitudes.col(j)).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(s.amplitudes.cwiseAbs().topRows(2).maxCoeff() <= 2.0);
  }

  TEST_CASE("invalid schedules are rejected") {
    ControlSchedule s;
    s.komega = 2;
    s.controlled = 2;
    s.tau_reg = 1.0;
    s.amplitudes = MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(s.validate(), SpinxferError);
    s.amplitudes << 1, 1, -1, -1;
    CHECK_NOTHROW(s.validate());
    s.tau_reg = -1.0;
    CHECK_THROWS_AS(s.validate(), SpinxferError);
    s.tau_reg = 1.0;
    s.model = ModelKind::Pulse;
    s.eps = 2.0;
    CHECK_THROWS_AS(s.validate(), SpinxferError);
    s.model = ModelKind::StepWise;
    s.trotter = 0;
    CHECK_THROWS_AS(s.validate(), SpinxferError);
  }

  TEST_CASE("zero control reduces every model to free evolution") {
    const auto h = spectrum(6, 2);
    const VectorXd zero = VectorXd::Constant(4, std::asin(0.0));
    for (auto m : {ModelKind::StepWise, ModelKind::Pulse}) {
      const auto s = ControlSchedule::from_angles(zero, 2, 4, 12.0, m, 7, 1e-3);
      const auto model = m == ModelKind::StepWise ? model1_propagator(h, s) : model2_propagator(h, s);
      const auto exact = controlled_exact_propagator(h, s);
      // the pulse model drifts for tau_reg / (1 + eps)
      const double drift = m == ModelKind::StepWise ? 12.0 : 12.0 / (1.0 + 1e-3);
      CHECK(max_diff(model, exact_propagator(h, drift)) < 1e-11);
      if (m == ModelKind::StepWise) CHECK(max_diff(exact, exact_propagator(h, 12.0)) < 1e-11);
    }
  }

  TEST_CASE("controlled exact propagator matches the Pade exponential") {
    std::mt19937_64 rng(5);
    const int n = 5;
    const auto d = chain_couplings(n);
    const auto h = spectrum(n, n);
    const auto s = random_schedule(2, 3, 6.0, ModelKind::StepWise, 1, 0.0, rng);
    MatrixXcd ref = MatrixXcd::Identity(1 << n, 1 << n);
    for (int j = 0; j < 3; ++j) ref = oracle::pade_propagator(oracle::full_hamiltonian(d.d, s.omega(n, j)), 2.0) * ref;
    const auto u = controlled_exact_propagator(h, s);
    for (int k = 1; k <= n; ++k)
      CHECK((oracle::project(ref, h.basis().sector(k)) - u.blocks[k]).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("Trotter error halves as the step count doubles") {
    std::mt19937_64 rng(9);
    const auto h = spectrum(6, 2);
    for (int rep = 0; rep < 3; ++rep) {
      const auto base = random_schedule(2, 1, 2.0, ModelKind::StepWise, 10, 0.0, rng);
      const auto exact = controlled_exact_propagator(h, base);
      std::vector<double> err;
      for (int n : {10, 20, 40, 80}) {
        auto s = base;
        s.trotter = n;
        err.push_back(max_diff(model1_propagator(h, s), exact));
      }
      for (std::size_t i = 0; i + 1 < err.size(); ++i) {
        const double ratio = err[i] / err[i + 1];
        CHECK(ratio >= 1.7);
        CHECK(ratio <= 2.3);
      }
    }
  }

  TEST_CASE("pulse model converges to its exact counterpart as the pulse shortens") {
    std::mt19937_64 rng(13);
    const auto h = spectrum(6, 2);
    const auto base = random_schedule(2, 4, 10.0, ModelKind::Pulse, 1, 1e-1, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      auto s = base;
      s.eps = eps;
      const double e = max_diff(model2_propagator(h, s), controlled_exact_propagator(h, s));
      // first order in eps
      if (std::isfinite(prev)) CHECK(prev / e > 5.0);
      prev = e;
    }
  }

  TEST_CASE("rescaled pulse amplitudes leave the pulse factor unchanged") {
    const auto basis = excitation_basis(6, 2);
    const VectorXd w = (VectorXd(6) << 0, 0, 0, 0, 1.3, -1.3).finished();
    const double dt = 2.5;
    for (int k = 0; k <= 2; ++k) {
      const VectorXd ref = larmor_diagonal(*basis, k, w) * dt;
      for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const VectorXd scaled = larmor_diagonal(*basis, k, w / eps) * (eps * dt);
        for (Eigen::Index i = 0; i < ref.size(); ++i)
          CHECK(std::abs(std::exp(-kI * ref(i)) - std::exp(-kI * scaled(i))) < 1e-12);
      }
    }
  }

  TEST_CASE("model propagators stay unitary") {
    std::mt19937_64 rng(17);
    const auto h = spectrum(7, 2);
    for (auto m : {ModelKind::StepWise, ModelKind::Pulse}) {
      const auto s = random_schedule(3, 5, 30.0, m, 60, 1e-4, rng);
      const auto u = m == ModelKind::StepWise ? model1_propagator(h, s) : model2_propagator(h, s);
      CHECK(u.max_unitarity_error() < 1e-8);
      CHECK(controlled_exact_propagator(h, s).max_unitarity_error() < 1e-8);
    }
  }

  TEST_CASE("evolved densities match the full-space evolution") {
    std::mt19937_64 rng(19);
    const int n = 5;
    const auto d = chain_couplings(n);
    const auto h = spectrum(n, n);
    const auto rho = random_block_density(h.basis_ptr(), rng);
    const auto u = exact_propagator(h, 4.2);
    const auto out = evolve_density(rho, u);
    const MatrixXcd uf = oracle::pade_propagator(oracle::full_hamiltonian(d.d, VectorXd::Zero(n)), 4.2);
    const MatrixXcd ref = uf * oracle::embed(rho) * uf.adjoint();
    CHECK((oracle::embed(out) - ref).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("evolution preserves trace, populations, Hermiticity and positivity") {
    std::mt19937_64 rng(23);
    const auto h = spectrum(8, 3);
    for (int rep = 0; rep < 5; ++rep) {
      const auto rho = random_block_density(h.basis_ptr(), rng);
      const auto out = evolve_density(rho, exact_propagator(h, 1.0 + 10.0 * rep));
      CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-12));
      const auto p0 = rho.populations(), p1 = out.populations();
      for (std::size_t k = 0; k < p0.size(); ++k) CHECK(std::abs(p0[k] - p1[k]) < 1e-12);
      CHECK_NOTHROW(out.validate(1e-10));
      CHECK(out.min_eigenvalue() > -1e-12);
    }
  }

  TEST_CASE("the ground state is stationary") {
    const auto h = spectrum(6, 2);
    const auto g = ground_state_density(h.basis_ptr());
    const auto out = evolve_density(g, exact_propagator(h, 9.0));
    CHECK(std::abs(out.blocks[0](0, 0) - 1.0) < 1e-14);
    CHECK(out.blocks[1].cwiseAbs().maxCoeff() < 1e-14);
    const auto r = partial_trace_receiver(out, Partition::make(6, 2));
    CHECK(std::abs(r.blocks[0](0, 0) - 1.0) < 1e-14);
  }

  TEST_CASE("partial trace matches the brute-force trace") {
    std::mt19937_64 rng(29);
    for (int n : {4, 5, 6}) {
      const auto basis = excitation_basis(n, n);
      const auto part = Partition::make(n, 2);
      const auto rho = random_block_density(basis, rng);
      const auto r = partial_trace_receiver(rho, part);
      const MatrixXcd ref = oracle::trace_out_low(oracle::embed(rho), n, n - part.receiver);
      CHECK((oracle::embed(r) - ref).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(r.trace() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("a product state reduces to the receiver factor") {
    const int n = 5;
    const auto basis = excitation_basis(n, n);
    BlockDensityMatrix rho{basis, {}};
    for (int k = 0; k <= n; ++k) rho.blocks.push_back(MatrixXcd::Zero(basis->sector_size(k), basis->sector_size(k)));
    // sender site 1 excited, receiver (sites 4, 5) in |10>
    const Config c = 0b01001;
    const int i = basis->index_of(c);
    rho.blocks[2](i, i) = 1.0;
    const auto r = partial_trace_receiver(rho, Partition::make(n, 2));
    const MatrixXcd full = oracle::embed(r);
    CHECK(std::abs(full(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(full.trace() - 1.0) < 1e-15);
  }
}
