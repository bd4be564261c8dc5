#include "spinxfer/ptz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/tools/minima.hpp>

namespace spinxfer {

MatrixXd exchange_unitary(int n) {
  if (n < 1) throw SpinxferError("exchange unitary needs at least one site");
  const Eigen::Index d = Eigen::Index{1} << n;
  MatrixXd u = MatrixXd::Identity(d, d);
  u(0, 0) = u(d - 1, d - 1) = 0.0;
  u(0, d - 1) = u(d - 1, 0) = 1.0;
  return u;
}

MatrixXd exchange_unitary(int n, Config a, Config b) {
  if (n < 1) throw SpinxferError("exchange unitary needs at least one site");
  const Eigen::Index d = Eigen::Index{1} << n;
  if (a >= static_cast<Config>(d) || b >= static_cast<Config>(d)) throw SpinxferError("exchange: configuration out of range");
  MatrixXd u = MatrixXd::Identity(d, d);
  const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
  u(ia, ia) = u(ib, ib) = 0.0;
  u(ia, ib) = u(ib, ia) = 1.0;
  return u;
}

double CoherenceState::trace() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

double CoherenceState::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(b, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

MatrixXcd CoherenceState::dense() const {
  const Eigen::Index d = Eigen::Index{1} << sender;
  MatrixXcd out = MatrixXcd::Zero(d, d);
  for (int k = 0; k <= kmax(); ++k) {
    const auto cfg = SenderChannel::sender_configs(sender, k);
    for (std::size_t a = 0; a < cfg.size(); ++a)
      for (std::size_t b = 0; b < cfg.size(); ++b)
        out(static_cast<Eigen::Index>(cfg[a]), static_cast<Eigen::Index>(cfg[b])) =
            blocks[k](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return out;
}

CoherenceState CoherenceState::from_dense(const MatrixXcd& rho, int sender, int kmax) {
  if (rho.rows() != (Eigen::Index{1} << sender) || rho.cols() != rho.rows())
    throw SpinxferError("coherence state: dense matrix has the wrong dimension");
  CoherenceState s;
  s.sender = sender;
  for (int k = 0; k <= kmax; ++k) {
    const auto cfg = SenderChannel::sender_configs(sender, k);
    const auto d = static_cast<Eigen::Index>(cfg.size());
    MatrixXcd b(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index c = 0; c < d; ++c) b(a, c) = rho(static_cast<Eigen::Index>(cfg[a]), static_cast<Eigen::Index>(cfg[c]));
    s.blocks.push_back(std::move(b));
  }
  return s;
}

int ExtendedReceiverUnitary::parameter_count(int sites, int kmax) {
  int n = 0;
  for (int k = 1; k <= kmax; ++k) {
    const auto d = static_cast<int>(binomial(sites, k));
    n += d * d;
  }
  return n;
}

MatrixXcd hermitian_from_params(const double* p, int d) {
  MatrixXcd g(d, d);
  for (int i = 0; i < d; ++i) g(i, i) = *p++;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      g(i, j) = cplx(p[0], p[1]);
      g(j, i) = cplx(p[0], -p[1]);
      p += 2;
    }
  return g;
}

ExtendedReceiverUnitary er_unitary(const VectorXd& params, int sites, int kmax) {
  if (sites < 1 || kmax < 0 || kmax > sites) throw SpinxferError("er_unitary: invalid size");
  if (params.size() != ExtendedReceiverUnitary::parameter_count(sites, kmax))
    throw SpinxferError("er_unitary: expected " + std::to_string(ExtendedReceiverUnitary::parameter_count(sites, kmax)) +
                        " parameters, got " + std::to_string(params.size()));
  ExtendedReceiverUnitary u;
  u.sites = sites;
  u.blocks.push_back(MatrixXcd::Identity(1, 1));
  const double* p = params.data();
  for (int k = 1; k <= kmax; ++k) {
    const auto d = static_cast<int>(binomial(sites, k));
    u.blocks.push_back(exp_i_hermitian(hermitian_from_params(p, d)));
    p += d * d;
  }
  return u;
}

MatrixXcd apply_er(const ExtendedReceiverUnitary& er, const ExcitationBasis& basis, const Partition& part, int k,
                   const MatrixXcd& cols) {
  const int shift = part.extended_offset();
  if (er.sites != part.extended_receiver) throw SpinxferError("apply_er: unitary size differs from the extended receiver");
  const Config rest_mask = (Config{1} << shift) - 1;
  const auto eb = excitation_basis(er.sites, er.sites);
  const auto& sec = basis.sector(k);
  MatrixXcd out = MatrixXcd::Zero(cols.rows(), cols.cols());
  for (std::size_t a = 0; a < sec.size(); ++a) {
    const Config rest = sec[a] & rest_mask;
    const Config e = sec[a] >> shift;
    const int ke = popcount(e);
    if (ke > er.kmax()) throw SpinxferError("apply_er: unitary lacks sector " + std::to_string(ke));
    const int ie = eb->index_of(e);
    const auto& esec = eb->sector(ke);
    for (std::size_t b = 0; b < esec.size(); ++b) {
      const int row = basis.index_of(rest | (esec[b] << shift));
      out.row(row) += er.blocks[ke](static_cast<Eigen::Index>(b), ie) * cols.row(static_cast<Eigen::Index>(a));
    }
  }
  return out;
}

CoherenceLayout::CoherenceLayout(int sender_, int kmax_) : sender(sender_), kmax(kmax_) {
  if (kmax < 0 || kmax > sender) throw SpinxferError("coherence layout: kmax out of range");
  for (int k = 0; k <= kmax; ++k) {
    configs.push_back(SenderChannel::sender_configs(sender, k));
    first.push_back(static_cast<int>(entries.size()));
    const int d = static_cast<int>(configs[k].size());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) entries.push_back({k, a, b});
  }
}

CoherenceState CoherenceLayout::unpack(const VectorXcd& v) const {
  CoherenceState s;
  s.sender = sender;
  for (int k = 0; k <= kmax; ++k) {
    const auto d = static_cast<Eigen::Index>(configs[k].size());
    MatrixXcd b(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index c = 0; c < d; ++c) b(a, c) = v(index(k, static_cast<int>(a), static_cast<int>(c)));
    s.blocks.push_back(std::move(b));
  }
  return s;
}

VectorXcd CoherenceLayout::pack(const CoherenceState& s) const {
  VectorXcd v(size());
  for (const auto& e : entries) v(index(e.k, e.a, e.b)) = s.blocks.at(e.k)(e.a, e.b);
  return v;
}

MatrixXcd ptz_linear_map(const SenderChannel& ch, const CoherenceLayout& lay) {
  if (ch.sender_sites() != lay.sender || ch.receiver_sites() != lay.sender)
    throw SpinxferError("ptz: channel and layout sizes differ");
  if (ch.sender_kmax() < lay.kmax) throw SpinxferError("ptz: channel lacks sender sectors");
  MatrixXcd l = MatrixXcd::Zero(lay.size(), lay.size());
  for (int k = 0; k <= lay.kmax; ++k) {
    const auto& cs = lay.configs[k];
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = 0; b < cs.size(); ++b) {
        const MatrixXcd r = ch.receiver_block(cs[a], cs[b]);
        const int col = lay.index(k, static_cast<int>(a), static_cast<int>(b));
        for (int kr = 0; kr <= lay.kmax; ++kr) {
          const auto& cr = lay.configs[kr];
          for (std::size_t x = 0; x < cr.size(); ++x)
            for (std::size_t y = 0; y < cr.size(); ++y)
              l(lay.index(kr, static_cast<int>(x), static_cast<int>(y)), col) =
                  r(static_cast<Eigen::Index>(cr[x]), static_cast<Eigen::Index>(cr[y]));
        }
      }
  }
  return l;
}

std::string to_string(PtzStatus s) {
  switch (s) {
    case PtzStatus::Ok: return "ok";
    case PtzStatus::NonPositive: return "nonpositive";
    case PtzStatus::Singular: return "singular";
    case PtzStatus::NotZeroed: return "not_zeroed";
  }
  return "?";
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct LinearSolve {
  VectorXcd x;
  double residual = 0.0;
  double condition = 0.0;
};

/// Least-squares solution of [A; t^T] x = [0; 1].
LinearSolve solve_with_trace(const MatrixXcd& a, const VectorXd& trace_row) {
  MatrixXcd m(a.rows() + 1, a.cols());
  m.topRows(a.rows()) = a;
  m.row(a.rows()) = trace_row.transpose().cast<cplx>();
  VectorXcd rhs = VectorXcd::Zero(m.rows());
  rhs(m.rows() - 1) = 1.0;
  Eigen::BDCSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  LinearSolve out;
  out.x = svd.solve(rhs);
  out.residual = (m * out.x - rhs).norm();
  const auto& sv = svd.singularValues();
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  return out;
}

void hermitize(CoherenceState& s) {
  for (auto& b : s.blocks) b = (0.5 * (b + b.adjoint())).eval();
}

void finish(PtzResult& r, double min_diag) {
  if (!(r.condition < 1e12)) {
    r.status = PtzStatus::Singular;
  } else if (r.state.min_eigenvalue() < -1e-8) {
    r.status = PtzStatus::NonPositive;
    r.delta_d = 0.0;
    return;
  }
  r.delta_d = std::max(0.0, min_diag);
}

}  // namespace

PtzResult ptz_full_solve(const SenderChannel& ch, double tau) {
  const int ns = ch.sender_sites();
  const CoherenceLayout lay(ns, ns);
  MatrixXcd a = ptz_linear_map(ch, lay);
  VectorXd trace_row = VectorXd::Zero(lay.size());
  for (const auto& e : lay.entries) {
    const int target = e.k == 0 ? ns : (e.k == ns ? 0 : e.k);
    a(lay.index(e.k, e.a, e.b), lay.index(target, e.a, e.b)) -= 1.0;
    if (e.a == e.b) trace_row(lay.index(e.k, e.a, e.b)) = 1.0;
  }
  const auto sol = solve_with_trace(a, trace_row);
  PtzResult r;
  r.tau = tau;
  r.state = lay.unpack(sol.x);
  hermitize(r.state);
  r.solve_residual = sol.residual;
  r.condition = sol.condition;
  double m = std::numeric_limits<double>::infinity();
  for (int k = 1; k < ns; ++k) m = std::min(m, r.state.blocks[k].diagonal().real().minCoeff());
  finish(r, ns > 1 ? m : 0.0);
  return r;
}

PtzResult ptz_full_solve(const SpectralHamiltonian& h, const Partition& part, double tau) {
  return ptz_full_solve(SenderChannel::from_spectrum(h, tau, part, part.sender), tau);
}

Config cut_target(int kmax) { return (Config{1} << kmax) - 1; }

namespace {

std::vector<MatrixXcd> sender_columns(const SpectralHamiltonian& h, const Partition& part, double tau, int kmax) {
  std::vector<MatrixXcd> cols;
  for (int k = 0; k <= kmax; ++k) {
    std::vector<int> idx;
    for (Config c : SenderChannel::sender_configs(part.sender, k)) idx.push_back(h.basis().index_of(c));
    cols.push_back(h.propagator_columns(k, tau, idx));
  }
  return cols;
}

void check_cut(const SpectralHamiltonian& h, const Partition& part, int kk) {
  part.validate();
  if (!(kk >= 1 && kk < part.sender)) throw SpinxferError("ptz cut: kmax must lie in [1, sender)");
  if (part.extended_receiver < part.receiver) throw SpinxferError("ptz cut: extended receiver smaller than the receiver");
  if (h.sector_count() <= kk) throw SpinxferError("ptz cut: spectrum lacks sectors");
}

}  // namespace

std::vector<MatrixXcd> er_columns(const SpectralHamiltonian& h, const Partition& part, double tau,
                                  const ExtendedReceiverUnitary& er, int kmax) {
  auto cols = sender_columns(h, part, tau, kmax);
  for (int k = 0; k <= kmax; ++k) cols[k] = apply_er(er, h.basis(), part, k, cols[k]);
  return cols;
}

PtzResult ptz_cut_linear(const SpectralHamiltonian& h, const Partition& part, double tau, const VectorXd& er_params,
                         int kk) {
  check_cut(h, part, kk);
  const int ns = part.sender;
  const auto er = er_unitary(er_params, part.extended_receiver, kk);
  const auto cols = er_columns(h, part, tau, er, kk);
  const SenderChannel ch(h.basis(), part, kk, cols);

  PtzResult r;
  r.tau = tau;
  r.er_params = er_params;
  const int trow = h.basis().index_of(cut_target(kk) << part.receiver_offset());
  r.zeroing_residual = cols[kk].row(trow).norm();

  const CoherenceLayout lay(ns, kk);
  const auto& ck = lay.configs[kk];
  const int i11 = static_cast<int>(std::find(ck.begin(), ck.end(), cut_target(kk)) - ck.begin());
  const int e00 = lay.index(0, 0, 0), e11 = lay.index(kk, i11, i11);
  std::vector<int> keep;
  for (const auto& e : lay.entries)
    if (!(e.k == kk && ((e.a == i11) != (e.b == i11)))) keep.push_back(lay.index(e.k, e.a, e.b));

  MatrixXcd a = ptz_linear_map(ch, lay);
  for (const auto& e : lay.entries) {
    const int i = lay.index(e.k, e.a, e.b);
    a(i, i == e00 ? e11 : (i == e11 ? e00 : i)) -= 1.0;
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  MatrixXcd sub(n, n);
  VectorXd trace_row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = a(keep[i], keep[j]);
    const auto& e = lay.entries[keep[i]];
    trace_row(i) = e.a == e.b ? 1.0 : 0.0;
  }
  const auto sol = solve_with_trace(sub, trace_row);
  VectorXcd full = VectorXcd::Zero(lay.size());
  for (Eigen::Index i = 0; i < n; ++i) full(keep[i]) = sol.x(i);

  r.state = lay.unpack(full);
  hermitize(r.state);
  r.solve_residual = sol.residual;
  r.condition = sol.condition;
  double m = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kk; ++k)
    for (int j = 0; j < r.state.blocks[k].rows(); ++j)
      if (!(k == kk && j == i11)) m = std::min(m, r.state.blocks[k](j, j).real());
  finish(r, m);
  return r;
}

PtzResult ptz_cut_solve(const SpectralHamiltonian& h, const Partition& part, double tau, const CutOptions& opt) {
  const int kk = opt.kmax, ner = part.extended_receiver;
  check_cut(h, part, kk);
  const auto& basis = h.basis();
  const auto cols = sender_columns(h, part, tau, kk);

  // Only the ER row of the target configuration enters the zeroing condition.
  const auto eb = excitation_basis(ner, ner);
  const int eshift = part.extended_offset();
  const int it = eb->index_of((cut_target(kk) << part.receiver_offset()) >> eshift);
  const auto& esec = eb->sector(kk);
  const int dk = static_cast<int>(esec.size());
  MatrixXcd p(dk, cols[kk].cols());
  for (int b = 0; b < dk; ++b) p.row(b) = cols[kk].row(basis.index_of(esec[b] << eshift));

  auto residual = [&](const VectorXd& phi) {
    const MatrixXcd u = exp_i_hermitian(hermitian_from_params(phi.data(), dk));
    const VectorXcd z = (u.row(it) * p).transpose();
    VectorXd out(2 * z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      out(2 * i) = z(i).real();
      out(2 * i + 1) = z(i).imag();
    }
    return out;
  };

  VectorXd phi = VectorXd::Zero(dk * dk);
  LmResult best = levenberg_marquardt(residual, phi, opt.lm);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
  for (int t = 0; t < opt.restarts && best.residual.norm() > opt.zero_tol; ++t) {
    for (auto& v : phi) v = dist(rng);
    LmResult r = levenberg_marquardt(residual, phi, opt.lm);
    if (r.residual.norm() < best.residual.norm()) best = std::move(r);
  }

  VectorXd params = VectorXd::Zero(ExtendedReceiverUnitary::parameter_count(ner, kk));
  params.tail(dk * dk) = best.x;
  PtzResult r = ptz_cut_linear(h, part, tau, params, kk);
  if (r.status == PtzStatus::Ok && r.zeroing_residual > opt.zero_tol) r.status = PtzStatus::NotZeroed;
  return r;
}

double rect_delta(const MatrixXcd& rho_r) {
  MatrixXcd d = -rho_r;
  d(0, 0) += 1.0;
  return d.norm();
}

MatrixXcd pre_exchange_receiver(const CoherenceState& s) {
  const MatrixXd x = exchange_unitary(s.sender);
  return x * s.dense() * x;
}

PtzProtocol parse_protocol(const std::string& s) {
  if (s == "full") return PtzProtocol::Full;
  if (s == "cut") return PtzProtocol::Cut;
  if (s == "rect") return PtzProtocol::Rect;
  throw SpinxferError("unknown protocol '" + s + "' (expected full, cut or rect)");
}

std::string to_string(PtzProtocol p) {
  switch (p) {
    case PtzProtocol::Full: return "full";
    case PtzProtocol::Cut: return "cut";
    case PtzProtocol::Rect: return "rect";
  }
  return "?";
}

int ptz_sectors(const Partition& part, PtzProtocol protocol, const CutOptions& cut) {
  return protocol == PtzProtocol::Cut ? cut.kmax : part.sender;
}

PtzResult ptz_point(const SpectralHamiltonian& h, const Partition& part, PtzProtocol protocol, double tau,
                    const CutOptions& cut) {
  switch (protocol) {
    case PtzProtocol::Cut: return ptz_cut_solve(h, part, tau, cut);
    case PtzProtocol::Rect: {
      PtzResult r = ptz_full_solve(h, part, tau);
      r.delta = rect_delta(pre_exchange_receiver(r.state));
      return r;
    }
    case PtzProtocol::Full: break;
  }
  return ptz_full_solve(h, part, tau);
}

double ptz_objective(const PtzResult& r, PtzProtocol protocol) {
  if (r.status == PtzStatus::Singular) return kNan;
  return protocol == PtzProtocol::Rect ? r.delta : r.delta_d;
}

TauOptimum optimize_tau(const SpectralHamiltonian& h, const Partition& part, PtzProtocol protocol,
                        const std::vector<double>& taus, const CutOptions& cut, bool refine, Exec exec) {
  if (taus.empty()) throw SpinxferError("ptz: empty tau range");
  std::vector<PtzResult> res(taus.size());
  const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (std::size_t i = 0; i < taus.size(); ++i) res[i] = ptz_point(h, part, protocol, taus[i], cut);

  TauOptimum best;
  best.value = kNan;
  std::size_t ib = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double v = ptz_objective(res[i], protocol);
    if (!std::isnan(v) && !(v <= best.value)) {
      best = {v, taus[i], protocol == PtzProtocol::Cut ? res[i].zeroing_residual : res[i].solve_residual,
              res[i].status};
      ib = i;
    }
  }
  if (std::isnan(best.value) || !refine || taus.size() < 2) return best;

  const double lo = taus[ib > 0 ? ib - 1 : ib];
  const double hi = taus[ib + 1 < taus.size() ? ib + 1 : ib];
  auto f = [&](double t) {
    const double v = ptz_objective(ptz_point(h, part, protocol, t, cut), protocol);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : -v;
  };
  std::uintmax_t iters = 40;
  const auto [t, fv] = boost::math::tools::brent_find_minima(f, lo, hi, 30, iters);
  if (-fv > best.value) {
    const PtzResult r = ptz_point(h, part, protocol, t, cut);
    best = {-fv, t, protocol == PtzProtocol::Cut ? r.zeroing_residual : r.solve_residual, r.status};
  }
  return best;
}

void set_geometry_param(GeometrySpec& g, const std::string& name, double value) {
  if (name == "y0") g.y0 = value;
  else if (name == "chi") g.chi = value;
  else if (name == "dy") g.dy = value;
  else throw SpinxferError("unknown scan parameter '" + name + "' (expected y0, chi or dy)");
}

std::vector<ScanCell> scan_geometry(const ScanSpec& spec) {
  if (spec.values1.empty() || spec.values2.empty()) throw SpinxferError("scan: empty parameter range");
  if (spec.taus.empty()) throw SpinxferError("scan: empty tau range");
  spec.part.validate();
  if (spec.part.sites() != spec.geometry.n) throw SpinxferError("scan: partition does not match the site count");
  const int kmax = ptz_sectors(spec.part, spec.protocol, spec.cut);

  std::vector<ScanCell> cells(spec.values1.size() * spec.values2.size());
  const bool par = spec.exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    cell.p1 = spec.values1[c / spec.values2.size()];
    cell.p2 = spec.values2[c % spec.values2.size()];
    cell.best.value = kNan;
    try {
      GeometrySpec g = spec.geometry;
      set_geometry_param(g, spec.name1, cell.p1);
      set_geometry_param(g, spec.name2, cell.p2);
      const auto d = coupling_matrix(build_geometry(g), spec.mode);
      const SpectralHamiltonian h(build_blocks(d, VectorXd(), excitation_basis(g.n, kmax), Exec::Serial), kmax,
                                  Exec::Serial);
      cell.best = optimize_tau(h, spec.part, spec.protocol, spec.taus, spec.cut, spec.refine, Exec::Serial);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }
  return cells;
}

}  // namespace spinxfer
