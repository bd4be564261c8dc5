#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spinxfer/ptz.hpp"
#include "spinxfer/restoring.hpp"

using namespace spinxfer;

namespace {

const Partition kZigPart = Partition::make(9, 3, 4);

const SpectralHamiltonian& zigzag() {
  static const SpectralHamiltonian h(build_blocks(
      coupling_matrix(build_geometry({GeometryKind::Zigzag, 9, 1.3, std::numbers::pi / 2}), CouplingMode::AngularDipolar),
      {}, excitation_basis(9, 3)));
  return h;
}

CoherenceState random_coherence(int sender, int kmax, std::mt19937_64& rng) {
  CoherenceState s{sender, {}};
  for (int k = 0; k <= kmax; ++k)
    s.blocks.push_back(oracle::random_density(static_cast<int>(binomial(sender, k)), rng));
  return s;
}

VectorXd random_params(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd p(n);
  for (auto& v : p) v = u(rng);
  return p;
}

MatrixXcd zero_order(const MatrixXcd& rho, int sites, int kmax) {
  return CoherenceState::from_dense(rho, sites, kmax).dense();
}

}  // namespace

TEST_SUITE("ptz") {
  TEST_CASE("exchange unitary swaps the extreme configurations") {
    const MatrixXd u = exchange_unitary(2);
    CHECK(u(0, 3) == 1.0);
    CHECK(u(3, 0) == 1.0);
    CHECK(u(1, 1) == 1.0);
    CHECK((u * u - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    const MatrixXd v = exchange_unitary(3, 0, 3);
    CHECK(v(0, 3) == 1.0);
    CHECK(v(7, 7) == 1.0);
    CHECK_THROWS_AS(exchange_unitary(2, 0, 4), SpinxferError);
  }

  TEST_CASE("exchange conjugation preserves trace and Hermiticity") {
    std::mt19937_64 rng(47);
    const MatrixXcd rho = oracle::random_density(8, rng);
    const MatrixXd u = exchange_unitary(3);
    const MatrixXcd out = u * rho * u;
    CHECK(std::abs(out.trace() - 1.0) < 1e-14);
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("coherence states round-trip through dense form and layout") {
    std::mt19937_64 rng(53);
    const auto s = random_coherence(3, 3, rng);
    const auto back = CoherenceState::from_dense(s.dense(), 3, 3);
    for (int k = 0; k <= 3; ++k) CHECK((back.blocks[k] - s.blocks[k]).cwiseAbs().maxCoeff() == 0.0);
    const CoherenceLayout lay(3, 3);
    CHECK(lay.size() == 1 + 9 + 9 + 1);
    const auto again = lay.unpack(lay.pack(s));
    for (int k = 0; k <= 3; ++k) CHECK((again.blocks[k] - s.blocks[k]).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("extended receiver unitaries") {
    std::mt19937_64 rng(59);
    CHECK(ExtendedReceiverUnitary::parameter_count(4, 2) == 16 + 36);
    const auto id = er_unitary(VectorXd::Zero(52), 4, 2);
    for (int k = 0; k <= 2; ++k)
      CHECK((id.blocks[k] - MatrixXcd::Identity(id.blocks[k].rows(), id.blocks[k].cols())).cwiseAbs().maxCoeff() < 1e-15);
    const auto u = er_unitary(random_params(52, rng), 4, 2);
    for (const auto& b : u.blocks) CHECK(unitarity_error(b) < 1e-12);
    CHECK_THROWS_AS(er_unitary(VectorXd::Zero(51), 4, 2), SpinxferError);
    const VectorXd p = random_params(9, rng);
    const MatrixXcd g = hermitian_from_params(p.data(), 3);
    CHECK((g - g.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(g(0, 0).real() == p(0));
  }

  TEST_CASE("identity extended receiver leaves columns unchanged") {
    const auto& h = zigzag();
    const MatrixXcd cols = h.propagator(2, 7.0);
    const auto id = er_unitary(VectorXd::Zero(ExtendedReceiverUnitary::parameter_count(4, 2)), 4, 2);
    CHECK((apply_er(id, h.basis(), kZigPart, 2, cols) - cols).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("linear map preserves the trace") {
    std::mt19937_64 rng(61);
    const auto ch = SenderChannel::from_spectrum(zigzag(), 40.0, kZigPart, 3);
    const CoherenceLayout lay(3, 3);
    const MatrixXcd a = ptz_linear_map(ch, lay);
    const auto s = random_coherence(3, 3, rng);
    const auto r = lay.unpack(a * lay.pack(s));
    CHECK(std::abs(r.trace() - s.trace()) < 1e-12);
    // and agrees with the channel on the zero-order part
    CHECK((r.dense() - zero_order(ch.apply(s.dense()), 3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("two-excitation block transfers as W s W^dagger") {
    std::mt19937_64 rng(67);
    const auto& h = zigzag();
    const double tau = 33.0;
    const MatrixXcd u2 = h.propagator(2, tau);
    const auto senders = SenderChannel::sender_configs(3, 2);
    const auto receivers = SenderChannel::sender_configs(3, 2);
    MatrixXcd w(3, 3);
    for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 3; ++a)
        w(x, a) = u2(h.basis().index_of(receivers[x] << kZigPart.receiver_offset()), h.basis().index_of(senders[a]));
    CoherenceState s{3, {MatrixXcd::Zero(1, 1), MatrixXcd::Zero(3, 3), oracle::random_density(3, rng)}};
    const auto ch = SenderChannel::from_spectrum(h, tau, kZigPart, 2);
    const auto r = CoherenceState::from_dense(ch.apply(s.dense()), 3, 2);
    CHECK((r.blocks[2] - w * s.blocks[2] * w.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("at zero time the only solution is the fully excited sender") {
    const auto r = ptz_full_solve(zigzag(), kZigPart, 0.0);
    CHECK(r.status == PtzStatus::Ok);
    CHECK(std::abs(r.state.blocks[3](0, 0) - 1.0) < 1e-12);
    CHECK(r.delta_d == 0.0);
  }

  TEST_CASE("solved full-space state is transferred onto itself") {
    const auto& h = zigzag();
    for (double tau : {57.0, 100.0, 143.0}) {
      const auto ch = SenderChannel::from_spectrum(h, tau, kZigPart, 3);
      const auto r = ptz_full_solve(ch, tau);
      REQUIRE(r.status != PtzStatus::Singular);
      const MatrixXd x = exchange_unitary(3);
      const MatrixXcd back = zero_order(x * ch.apply(r.state.dense()) * x, 3, 3);
      CHECK((back - r.state.dense()).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(r.state.trace() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.delta_d <= 1.0 / 6.0 + 1e-12);
    }
  }

  TEST_CASE("cut protocol zeroes the target row and round-trips the state") {
    const auto& h = zigzag();
    CutOptions opt;
    for (double tau : {40.0, 100.0}) {
      const auto r = ptz_cut_solve(h, kZigPart, tau, opt);
      CHECK(r.zeroing_residual < 1e-8);
      REQUIRE(r.status != PtzStatus::Singular);
      const auto er = er_unitary(r.er_params, 4, 2);
      const SenderChannel ch(h.basis(), kZigPart, 2, er_columns(h, kZigPart, tau, er, 2));
      const MatrixXd x = exchange_unitary(3, 0, cut_target(2));
      const MatrixXcd back = zero_order(x * ch.apply(r.state.dense()) * x, 3, 2);
      CHECK((back - r.state.dense()).cwiseAbs().maxCoeff() < 1e-7);
      CHECK(r.delta_d <= 1.0 / 5.0 + 1e-12);
    }
  }

  TEST_CASE("cut result is invariant under a global phase of the extended receiver blocks") {
    const auto& h = zigzag();
    const auto r = ptz_cut_solve(h, kZigPart, 100.0, CutOptions{});
    VectorXd p = r.er_params;
    // sector 1 occupies the first 16 parameters, diagonals first
    for (int i = 0; i < 4; ++i) p(i) += 0.37;
    for (int i = 0; i < 6; ++i) p(16 + i) -= 1.1;
    const auto q = ptz_cut_linear(h, kZigPart, 100.0, p, 2);
    CHECK(q.delta_d == doctest::Approx(r.delta_d).epsilon(1e-8));
    CHECK(q.zeroing_residual < 1e-8);
  }

  TEST_CASE("cut protocol rejects an out-of-range excitation cut") {
    CutOptions opt;
    opt.kmax = 3;
    CHECK_THROWS_AS(ptz_cut_solve(zigzag(), kZigPart, 10.0, opt), SpinxferError);
    opt.kmax = 0;
    CHECK_THROWS_AS(ptz_cut_solve(zigzag(), kZigPart, 10.0, opt), SpinxferError);
  }

  TEST_CASE("rect distance of reference states") {
    MatrixXcd g = MatrixXcd::Zero(8, 8);
    g(0, 0) = 1.0;
    CHECK(rect_delta(g) == 0.0);
    MatrixXcd e = MatrixXcd::Zero(8, 8);
    e(1, 1) = 1.0;
    CHECK(rect_delta(e) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("singular results have no objective value") {
    PtzResult r;
    r.status = PtzStatus::Singular;
    CHECK(std::isnan(ptz_objective(r, PtzProtocol::Full)));
    r.status = PtzStatus::NonPositive;
    CHECK(ptz_objective(r, PtzProtocol::Full) == 0.0);
  }

  TEST_CASE("tau optimisation is independent of the execution mode") {
    std::vector<double> taus;
    for (double t = 10.0; t <= 60.0; t += 5.0) taus.push_back(t);
    const auto a = optimize_tau(zigzag(), kZigPart, PtzProtocol::Full, taus, {}, true, Exec::Serial);
    const auto b = optimize_tau(zigzag(), kZigPart, PtzProtocol::Full, taus, {}, true, Exec::Parallel);
    CHECK(a.value == b.value);
    CHECK(a.tau0 == b.tau0);
  }

  TEST_CASE("a one-cell scan reproduces the direct optimisation") {
    ScanSpec spec;
    spec.geometry = {GeometryKind::Zigzag, 9, 0.0, 0.0};
    spec.part = kZigPart;
    spec.name1 = "y0";
    spec.name2 = "chi";
    spec.values1 = {1.3};
    spec.values2 = {std::numbers::pi / 2};
    for (double t = 10.0; t <= 60.0; t += 5.0) spec.taus.push_back(t);
    const auto cells = scan_geometry(spec);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].error.empty());
    const auto direct = optimize_tau(zigzag(), kZigPart, PtzProtocol::Full, spec.taus, {});
    CHECK(cells[0].best.value == doctest::Approx(direct.value).epsilon(1e-12));
    CHECK(cells[0].best.tau0 == doctest::Approx(direct.tau0).epsilon(1e-12));
  }

  TEST_CASE("unknown geometry parameters and protocols are rejected") {
    GeometrySpec g;
    CHECK_THROWS_AS(set_geometry_param(g, "z0", 1.0), SpinxferError);
    CHECK_THROWS_AS(parse_protocol("partial"), SpinxferError);
  }
}
