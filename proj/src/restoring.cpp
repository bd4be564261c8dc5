#include "spinxfer/restoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <unordered_map>

namespace spinxfer {

std::vector<Config> SenderChannel::sender_configs(int sender, int k) {
  std::vector<Config> out;
  for (Config c = 0; c < (Config{1} << sender); ++c)
    if (popcount(c) == k) out.push_back(c);
  return out;
}

SenderChannel::SenderChannel(const ExcitationBasis& basis, const Partition& part, int sender_kmax,
                             const std::vector<MatrixXcd>& cols)
    : sender_(part.sender), receiver_(part.receiver), kmax_(sender_kmax) {
  part.validate();
  if (basis.sites() != part.sites()) throw SpinxferError("sender channel: partition does not match the basis");
  if (sender_kmax < 0 || sender_kmax > std::min(part.sender, basis.kmax()))
    throw SpinxferError("sender channel: sender excitation range exceeds the available sectors");
  if (static_cast<int>(cols.size()) <= sender_kmax)
    throw SpinxferError("sender channel: missing sector columns");

  const int shift = part.receiver_offset();
  const Config rest_mask = (Config{1} << shift) - 1;
  std::unordered_map<Config, int> rest_index;
  for (int k = 0; k <= kmax_; ++k)
    for (Config c : basis.sector(k)) rest_index.emplace(c & rest_mask, static_cast<int>(rest_index.size()));

  slot_.assign(std::size_t{1} << sender_, -1);
  for (int k = 0; k <= kmax_; ++k) {
    const auto configs = sender_configs(sender_, k);
    const auto& sec = basis.sector(k);
    if (cols[k].rows() != static_cast<Eigen::Index>(sec.size()) ||
        cols[k].cols() != static_cast<Eigen::Index>(configs.size()))
      throw SpinxferError("sender channel: column block " + std::to_string(k) + " has the wrong shape");
    for (std::size_t a = 0; a < configs.size(); ++a) {
      MatrixXcd m = MatrixXcd::Zero(static_cast<Eigen::Index>(rest_index.size()), receiver_dim());
      for (std::size_t row = 0; row < sec.size(); ++row)
        m(rest_index.at(sec[row] & rest_mask), static_cast<Eigen::Index>(sec[row] >> shift)) =
            cols[k](static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a));
      slot_[configs[a]] = static_cast<int>(amp_.size());
      amp_.push_back(std::move(m));
    }
  }
}

namespace {

std::vector<int> sender_columns(const ExcitationBasis& basis, int sender, int k) {
  std::vector<int> idx;
  for (Config c : SenderChannel::sender_configs(sender, k)) idx.push_back(basis.index_of(c));
  return idx;
}

}  // namespace

SenderChannel SenderChannel::from_propagator(const BlockPropagator& u, const Partition& part, int sender_kmax) {
  if (u.sector_count() <= sender_kmax) throw SpinxferError("sender channel: propagator lacks sectors");
  std::vector<MatrixXcd> cols;
  for (int k = 0; k <= sender_kmax; ++k) {
    const auto idx = sender_columns(*u.basis, part.sender, k);
    MatrixXcd c(u.blocks[k].rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) c.col(static_cast<Eigen::Index>(a)) = u.blocks[k].col(idx[a]);
    cols.push_back(std::move(c));
  }
  return SenderChannel(*u.basis, part, sender_kmax, cols);
}

SenderChannel SenderChannel::from_spectrum(const SpectralHamiltonian& h, double tau, const Partition& part,
                                           int sender_kmax) {
  if (h.sector_count() <= sender_kmax) throw SpinxferError("sender channel: spectrum lacks sectors");
  std::vector<MatrixXcd> cols;
  for (int k = 0; k <= sender_kmax; ++k)
    cols.push_back(h.propagator_columns(k, tau, sender_columns(h.basis(), part.sender, k)));
  return SenderChannel(h.basis(), part, sender_kmax, cols);
}

MatrixXcd SenderChannel::receiver_block(Config i, Config j) const {
  const int si = slot_.at(i), sj = slot_.at(j);
  if (si < 0 || sj < 0) return MatrixXcd::Zero(receiver_dim(), receiver_dim());
  return amp_[si].transpose() * amp_[sj].conjugate();
}

MatrixXcd SenderChannel::apply(const MatrixXcd& rho_s) const {
  const Eigen::Index ds = Eigen::Index{1} << sender_;
  if (rho_s.rows() != ds || rho_s.cols() != ds) throw SpinxferError("sender state has the wrong dimension");
  MatrixXcd out = MatrixXcd::Zero(receiver_dim(), receiver_dim());
  for (Eigen::Index i = 0; i < ds; ++i) {
    for (Eigen::Index j = 0; j < ds; ++j) {
      const cplx v = rho_s(i, j);
      if (v == cplx{}) continue;
      if (slot_[i] < 0 || slot_[j] < 0) {
        if (std::abs(v) > 1e-14) throw SpinxferError("sender state populates configurations outside the channel");
        continue;
      }
      out += v * receiver_block(static_cast<Config>(i), static_cast<Config>(j));
    }
  }
  return out;
}

MatrixXcd TransferTensor::apply(const MatrixXcd& rho_s) const {
  const Eigen::Index ds = Eigen::Index{1} << sender;
  if (rho_s.rows() != ds || rho_s.cols() != ds) throw SpinxferError("sender state has the wrong dimension");
  MatrixXcd out = MatrixXcd::Zero(Eigen::Index{1} << receiver, Eigen::Index{1} << receiver);
  for (Eigen::Index i = 0; i < ds; ++i)
    for (Eigen::Index j = 0; j < ds; ++j) out += rho_s(i, j) * blocks[i * ds + j];
  return out;
}

TransferTensor transfer_tensor(const SenderChannel& ch) {
  TransferTensor t;
  t.sender = ch.sender_sites();
  t.receiver = ch.receiver_sites();
  const Config ds = Config{1} << t.sender;
  for (Config i = 0; i < ds; ++i)
    for (Config j = 0; j < ds; ++j) t.blocks.push_back(ch.receiver_block(i, j));
  return t;
}

TransferTensor transfer_tensor(const BlockPropagator& u, const Partition& part, int sender_kmax) {
  return transfer_tensor(SenderChannel::from_propagator(u, part, sender_kmax));
}

namespace {

struct SiteIndex {
  std::vector<int> send, recv;
};

SiteIndex one_excitation_index(const BlockPropagator& u, const Partition& part) {
  part.validate();
  if (u.sector_count() < 2) throw SpinxferError("restoring needs the one-excitation block");
  if (u.basis->sites() != part.sites()) throw SpinxferError("restoring: partition does not match the basis");
  SiteIndex s;
  for (int r = 0; r < part.sender; ++r) {
    s.send.push_back(u.basis->index_of(Config{1} << r));
    s.recv.push_back(u.basis->index_of(Config{1} << (part.receiver_offset() + r)));
  }
  return s;
}

}  // namespace

std::vector<cplx> restore_residuals(const BlockPropagator& u, const Partition& part) {
  if (part.sender != part.receiver) throw SpinxferError("restoring needs equal sender and receiver sizes");
  const auto idx = one_excitation_index(u, part);
  std::vector<cplx> out;
  for (int r = 0; r < part.receiver; ++r)
    for (int s = 0; s < part.sender; ++s)
      if (r != s) out.push_back(u.blocks[1](idx.recv[r], idx.send[s]));
  return out;
}

LambdaFactors lambda_factors(const BlockPropagator& u, const Partition& part, double tau) {
  const auto idx = one_excitation_index(u, part);
  LambdaFactors f;
  f.tau = tau;
  f.provenance = u.provenance;
  f.lambda.resize(part.receiver);
  for (int r = 0; r < part.receiver; ++r) f.lambda(r) = u.blocks[1](idx.recv[r], idx.send[r]) * std::conj(u.u0);
  return f;
}

void RestoreOptions::validate(const Partition& part) const {
  part.validate();
  if (part.sender != part.receiver) throw SpinxferError("restore: sender and receiver sizes differ");
  if (trials < 1) throw SpinxferError("restore: trials must be at least 1");
  if (controlled < 2 || controlled > part.sites())
    throw SpinxferError("restore: controlled sites must lie in [2, n]");
  if (komega < 1) throw SpinxferError("restore: komega must be positive");
  const int unknowns = ControlSchedule::free_parameter_count(controlled, komega);
  const int equations = 2 * part.sender * (part.sender - 1);
  if (unknowns < equations)
    throw SpinxferError("restore: " + std::to_string(unknowns) + " free parameters for " + std::to_string(equations) +
                        " real equations");
  if (model == ModelKind::StepWise && trotter < 1) throw SpinxferError("restore: trotter must be at least 1");
  if (model == ModelKind::Pulse && !(eps > 0.0 && eps < 1.0)) throw SpinxferError("restore: eps must lie in (0, 1)");
}

BlockPropagator schedule_propagator(const SpectralHamiltonian& h0, const ControlSchedule& s, int max_sector) {
  switch (s.model) {
    case ModelKind::StepWise: return model1_propagator(h0, s, max_sector);
    case ModelKind::Pulse: return model2_propagator(h0, s, max_sector);
    case ModelKind::Exact: break;
  }
  return controlled_exact_propagator(h0, s, max_sector);
}

namespace {

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

VectorXd stack(const std::vector<cplx>& v) {
  VectorXd out(2 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(2 * i) = v[i].real();
    out(2 * i + 1) = v[i].imag();
  }
  return out;
}

}  // namespace

std::vector<ControlSolution> solve_controls(const SpectralHamiltonian& h0, const Partition& part, double tau_reg,
                                            const RestoreOptions& opt) {
  opt.validate(part);
  if (!(tau_reg > 0.0)) throw SpinxferError("restore: tau_reg must be positive");
  const int np = ControlSchedule::free_parameter_count(opt.controlled, opt.komega);

  auto make = [&](const VectorXd& angles) {
    return ControlSchedule::from_angles(angles, opt.controlled, opt.komega, tau_reg, opt.model, opt.trotter, opt.eps);
  };
  auto residual = [&](const VectorXd& angles) {
    return stack(restore_residuals(schedule_propagator(h0, make(angles), 1), part));
  };

  std::vector<std::optional<ControlSolution>> slots(opt.trials);
  const bool par = opt.exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (int t = 0; t < opt.trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
    VectorXd x0(np);
    for (int i = 0; i < np; ++i) x0(i) = dist(rng);

    const LmResult r = levenberg_marquardt(residual, x0, opt.lm);
    if (!r.converged) continue;
    ControlSolution s;
    s.trial = t;
    s.angles = r.x;
    s.schedule = make(r.x);
    const auto um = schedule_propagator(h0, s.schedule, 1);
    const auto ue = controlled_exact_propagator(h0, s.schedule, 1);
    s.model_residual = max_abs(restore_residuals(um, part));
    s.exact_residual = max_abs(restore_residuals(ue, part));
    s.lambda_model = lambda_factors(um, part, tau_reg).lambda;
    s.lambda_exact = lambda_factors(ue, part, tau_reg).lambda;
    slots[t] = std::move(s);
  }

  std::vector<ControlSolution> found;
  for (auto& s : slots)
    if (s) found.push_back(std::move(*s));
  std::stable_sort(found.begin(), found.end(), [](const ControlSolution& a, const ControlSolution& b) {
    return a.model_residual != b.model_residual ? a.model_residual < b.model_residual : a.trial < b.trial;
  });
  std::vector<ControlSolution> distinct;
  for (auto& s : found) {
    const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](const ControlSolution& d) {
      return (d.schedule.amplitudes - s.schedule.amplitudes).cwiseAbs().maxCoeff() < opt.dedupe_tol;
    });
    if (!dup) distinct.push_back(std::move(s));
  }
  return distinct;
}

RestorePoint restore_point(double tau, const std::vector<ControlSolution>& sols) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RestorePoint p;
  p.tau = tau;
  p.solutions = static_cast<int>(sols.size());
  if (sols.empty()) {
    p.s1 = p.s2 = p.lambda_model = p.lambda_exact = nan;
    return p;
  }
  p.s1 = p.s2 = std::numeric_limits<double>::infinity();
  p.lambda_model = -1.0;
  for (const auto& s : sols) {
    p.s1 = std::min(p.s1, s.exact_residual);
    p.s2 = std::min(p.s2, (s.lambda_model - s.lambda_exact).cwiseAbs().maxCoeff());
    const double lm = s.lambda_model.cwiseAbs().minCoeff();
    if (lm > p.lambda_model) {
      p.lambda_model = lm;
      p.lambda_exact = s.lambda_exact.cwiseAbs().minCoeff();
    }
  }
  return p;
}

RestoreMetrics s_metrics(const SpectralHamiltonian& h0, const Partition& part, const std::vector<double>& tau_grid,
                         const RestoreOptions& opt, bool keep_solutions) {
  opt.validate(part);
  if (tau_grid.empty()) throw SpinxferError("restore: empty tau grid");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RestoreMetrics m;
  m.tau0 = nan;
  m.lambda_n = nan;
  double s3 = nan, s4 = nan, s5 = nan;
  for (double tau : tau_grid) {
    auto sols = solve_controls(h0, part, tau, opt);
    RestorePoint p = restore_point(tau, sols);
    s3 = std::fmax(s3, p.s1);
    s4 = std::fmax(s4, p.s2);
    if (!std::isnan(p.lambda_model) && !(p.lambda_model <= s5)) {
      m.tau0 = tau;
      m.lambda_n = p.lambda_model;
    }
    s5 = std::fmax(s5, p.lambda_model);
    p.s3 = s3;
    p.s4 = s4;
    p.s5 = s5;
    m.points.push_back(p);
    if (keep_solutions) m.ensembles.push_back(std::move(sols));
  }
  return m;
}

double concurrence(const MatrixXcd& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw SpinxferError("concurrence needs a 4x4 two-qubit state");
  const double outside = std::max(rho.row(3).cwiseAbs().maxCoeff(), rho.col(3).cwiseAbs().maxCoeff());
  if (outside > 1e-10) throw SpinxferError("concurrence: state has a two-excitation component");
  return 2.0 * std::abs(rho(1, 2));
}

ConcurrencePoint concurrence_transfer(const BlockPropagator& model, const BlockPropagator& exact,
                                      const Partition& part, const MatrixXcd& rho_s, double tau) {
  if (part.sender != 2 || part.receiver != 2) throw SpinxferError("concurrence transfer needs two-qubit ends");
  const double cs = concurrence(rho_s);
  if (cs < 1e-14) throw SpinxferError("concurrence transfer: sender state has zero concurrence");
  const double cm = concurrence(transfer_tensor(model, part, 1).apply(rho_s));
  const double ce = concurrence(transfer_tensor(exact, part, 1).apply(rho_s));
  return {tau, cm / cs, ce / cs, std::abs(cm - ce) / cs};
}

}  // namespace spinxfer
