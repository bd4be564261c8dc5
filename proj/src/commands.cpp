#include "spinxfer/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/version.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "spinxfer/analytic.hpp"
#include "spinxfer/ptz.hpp"
#include "spinxfer/restoring.hpp"
#include "spinxfer/stats.hpp"

namespace spinxfer {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw SpinxferError("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

namespace {

double r12(double v) { return std::isnan(v) ? v : std::stod(fmt(v)); }

json num(double v) { return std::isnan(v) ? json(nullptr) : json(r12(v)); }

class Output {
public:
  explicit Output(const RunConfig& cfg) : dir_(cfg.out_dir) { std::filesystem::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    names_.push_back(name);
    std::ofstream f(dir_ / name);
    if (!f) throw SpinxferError("cannot write " + (dir_ / name).string());
    return f;
  }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

SpectralHamiltonian chain_spectrum(const RunConfig& cfg, int kmax) {
  const auto d = coupling_matrix(build_geometry(cfg.geometry), cfg.mode);
  return SpectralHamiltonian(build_blocks(d, VectorXd(), excitation_basis(cfg.geometry.n, kmax)), kmax);
}

RestoreOptions restore_options(const RunConfig& cfg) {
  RestoreOptions o;
  o.komega = cfg.komega;
  o.controlled = cfg.controlled;
  o.model = cfg.model;
  o.trotter = cfg.trotter;
  o.eps = cfg.eps;
  o.trials = cfg.trials;
  o.seed = cfg.seed;
  o.lm.tol = cfg.tol;
  o.lm.max_iterations = cfg.max_iterations;
  o.dedupe_tol = cfg.dedupe_tol;
  return o;
}

CutOptions cut_options(const RunConfig& cfg) {
  CutOptions o;
  o.kmax = cfg.cut_kmax;
  o.restarts = cfg.restarts;
  o.seed = cfg.seed;
  o.zero_tol = cfg.zero_tol;
  return o;
}

json complex_rows(const MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({num(m(i, j).real()), num(m(i, j).imag())});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<std::string> run_restore(const RunConfig& cfg) {
  const auto part = cfg.partition();
  const auto opt = restore_options(cfg);
  opt.validate(part);
  const auto h0 = chain_spectrum(cfg, 1);
  const auto m = s_metrics(h0, part, cfg.tau_grid(), opt, true);

  Output out(cfg);
  {
    auto f = out.open("restore.csv");
    f << "tau,S1,S2,S3,S4,S5\n";
    for (const auto& p : m.points)
      f << fmt(p.tau) << ',' << fmt(p.s1) << ',' << fmt(p.s2) << ',' << fmt(p.s3) << ',' << fmt(p.s4) << ','
        << fmt(p.s5) << '\n';
  }
  {
    auto f = out.open("lambda.csv");
    f << "tau,solutions,lambda_model,lambda_exact\n";
    for (const auto& p : m.points)
      f << fmt(p.tau) << ',' << p.solutions << ',' << fmt(p.lambda_model) << ',' << fmt(p.lambda_exact) << '\n';
  }
  {
    auto f = out.open("solutions.jsonl");
    for (std::size_t i = 0; i < m.points.size(); ++i)
      for (const auto& s : m.ensembles[i]) {
        json rec;
        rec["tau"] = num(m.points[i].tau);
        rec["trial"] = s.trial;
        json angles = json::array();
        for (double a : s.angles) angles.push_back(num(a));
        rec["angles"] = angles;
        rec["model_residual"] = num(s.model_residual);
        rec["exact_residual"] = num(s.exact_residual);
        f << rec.dump() << '\n';
      }
  }
  {
    auto f = out.open("restore_summary.json");
    json s;
    s["tau0"] = num(m.tau0);
    s["lambda_n"] = num(m.lambda_n);
    f << s.dump(2) << '\n';
  }
  if (cfg.concurrence) {
    if (part.sender != 2) throw SpinxferError("config key 'restore.concurrence': needs partition.sender = 2");
    MatrixXcd epr = MatrixXcd::Zero(4, 4);
    epr(1, 1) = epr(1, 2) = epr(2, 1) = epr(2, 2) = 0.5;
    auto f = out.open("concurrence.csv");
    f << "tau,c_norm_model,c_norm_exact,discrepancy\n";
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      const auto& sols = m.ensembles[i];
      if (sols.empty()) continue;
      const auto best = std::max_element(sols.begin(), sols.end(), [](const auto& a, const auto& b) {
        return a.lambda_model.cwiseAbs().minCoeff() < b.lambda_model.cwiseAbs().minCoeff();
      });
      const auto c = concurrence_transfer(schedule_propagator(h0, best->schedule, 1),
                                          controlled_exact_propagator(h0, best->schedule, 1), part, epr,
                                          m.points[i].tau);
      f << fmt(c.tau) << ',' << fmt(c.c_norm_model) << ',' << fmt(c.c_norm_exact) << ',' << fmt(c.discrepancy) << '\n';
    }
  }
  return out.names();
}

std::vector<std::string> run_ptz(const RunConfig& cfg, const std::string& protocol_override) {
  const PtzProtocol protocol = parse_protocol(protocol_override.empty() ? cfg.protocol : protocol_override);
  if (protocol == PtzProtocol::Rect && cfg.geometry.kind != GeometryKind::Rectangular)
    throw SpinxferError("config key 'geometry.kind': rect needs a rectangular geometry");
  const auto part = cfg.partition();
  const auto cut = cut_options(cfg);
  const auto taus = cfg.tau_grid();
  const auto v1 = cfg.values1(), v2 = cfg.values2();
  Output out(cfg);

  if (v1.size() == 1 && v2.size() == 1) {
    RunConfig point = cfg;
    set_geometry_param(point.geometry, cfg.param1, v1[0]);
    set_geometry_param(point.geometry, cfg.param2, v2[0]);
    const int kmax = ptz_sectors(part, protocol, cut);
    const auto h = chain_spectrum(point, kmax);
    std::vector<PtzResult> curve(taus.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < taus.size(); ++i) curve[i] = ptz_point(h, part, protocol, taus[i], cut);
    {
      auto f = out.open("ptz_curve.csv");
      f << "tau,delta,residual,status\n";
      for (const auto& r : curve)
        f << fmt(r.tau) << ',' << fmt(ptz_objective(r, protocol)) << ','
          << fmt(protocol == PtzProtocol::Cut ? r.zeroing_residual : r.solve_residual) << ',' << to_string(r.status)
          << '\n';
    }
    const auto best = optimize_tau(h, part, protocol, taus, cut, cfg.refine);
    json rec;
    rec["protocol"] = to_string(protocol);
    rec[cfg.param1] = num(v1[0]);
    rec[cfg.param2] = num(v2[0]);
    rec["delta"] = num(best.value);
    rec["tau0"] = num(best.tau0);
    rec["residual"] = num(best.residual);
    rec["status"] = to_string(best.status);
    if (!std::isnan(best.value)) {
      const auto r = ptz_point(h, part, protocol, best.tau0, cut);
      json blocks = json::array();
      for (const auto& b : r.state.blocks) blocks.push_back(complex_rows(b));
      rec["delta_d"] = num(r.delta_d);
      rec["blocks"] = blocks;
    }
    auto f = out.open("ptz_state.json");
    f << rec.dump(2) << '\n';
    return out.names();
  }

  ScanSpec spec;
  spec.geometry = cfg.geometry;
  spec.mode = cfg.mode;
  spec.part = part;
  spec.protocol = protocol;
  spec.name1 = cfg.param1;
  spec.name2 = cfg.param2;
  spec.values1 = v1;
  spec.values2 = v2;
  spec.taus = taus;
  spec.cut = cut;
  spec.refine = cfg.refine;
  const auto cells = scan_geometry(spec);
  auto f = out.open("scan.csv");
  f << "param1,param2,delta,tau0,residual,status\n";
  for (const auto& c : cells) {
    f << fmt(c.p1) << ',' << fmt(c.p2) << ',';
    if (!c.error.empty()) f << "nan,nan,nan,error\n";
    else
      f << fmt(c.best.value) << ',' << fmt(c.best.tau0) << ',' << fmt(c.best.residual) << ','
        << (std::isnan(c.best.value) ? std::string("failed") : to_string(c.best.status)) << '\n';
  }
  return out.names();
}

std::vector<std::string> run_analytic(const RunConfig& cfg) {
  std::vector<int> ns;
  for (int n = cfg.n_min; n <= cfg.n_max; n += cfg.n_step) ns.push_back(n);
  if (ns.empty()) throw SpinxferError("config key 'analytic.n_max': empty n range");
  ScanSOptions opt;
  opt.points = cfg.points;
  opt.window_exponent = cfg.window_exponent;
  opt.refine = cfg.refine;
  std::vector<SPoint> rows(ns.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < ns.size(); ++i) rows[i] = scan_s(ns[i], opt);

  Output out(cfg);
  {
    auto f = out.open("analytic.csv");
    f << "N,S,tau0\n";
    for (const auto& r : rows) f << r.n << ',' << fmt(r.s) << ',' << fmt(r.tau0) << '\n';
  }
  if (rows.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      x.push_back(r.n);
      y.push_back(std::log10(r.tau0));
    }
    const auto fit = linear_fit(x, y);
    json j;
    j["log10_tau0_slope"] = num(fit.slope);
    j["log10_tau0_intercept"] = num(fit.intercept);
    j["r2"] = num(fit.r2);
    auto f = out.open("analytic_fit.json");
    f << j.dump(2) << '\n';
  }
  return out.names();
}

std::vector<std::string> run_evolve(const RunConfig& cfg) {
  const auto part = cfg.partition();
  const auto h = chain_spectrum(cfg, 1);
  Output out(cfg);
  auto f = out.open("evolve.csv");
  f << "tau";
  for (int r = 1; r <= part.receiver; ++r) f << ",lambda" << r;
  f << ",unitarity\n";
  for (double tau : cfg.tau_grid()) {
    const auto u = exact_propagator(h, tau);
    const auto lf = lambda_factors(u, part, tau);
    f << fmt(tau);
    for (int r = 0; r < part.receiver; ++r) f << ',' << fmt(std::abs(lf.lambda(r)));
    f << ',' << fmt(u.max_unitarity_error()) << '\n';
  }
  return out.names();
}

void write_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& outputs,
                    double runtime_seconds, int threads) {
  const std::string canon = cfg.canonical();
  json m;
  m["command"] = command;
  m["config_hash"] = sha256_hex(canon);
  json c = json::object();
  std::istringstream is(canon);
  for (std::string line; std::getline(is, line);) {
    const auto eq = line.find('=');
    c[line.substr(0, eq)] = line.substr(eq + 1);
  }
  m["config"] = c;
  m["versions"] = {{"spinxfer", "0.1.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"compiler", __VERSION__}};
  m["runtime_seconds"] = runtime_seconds;
  m["threads"] = threads;
  m["outputs"] = outputs;
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream f(std::filesystem::path(cfg.out_dir) / "manifest.json");
  f << m.dump(2) << '\n';
}

}  // namespace spinxfer
