#include "spinxfer/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace spinxfer {

namespace {

enum class Kind { T, U, V, W };

/// Chebyshev polynomial of the given kind by the common three-term recurrence.
double cheb(Kind kind, int deg, double x) {
  if (deg < 0) return 0.0;
  double prev = 1.0;
  double cur = 0.0;
  switch (kind) {
    case Kind::T: cur = x; break;
    case Kind::U: cur = 2.0 * x; break;
    case Kind::V: cur = 2.0 * x - 1.0; break;
    case Kind::W: cur = 2.0 * x + 1.0; break;
  }
  if (deg == 0) return prev;
  for (int k = 1; k < deg; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// The boundary equation of each family divided by its trivial factor.
double family_equation(int n, bool cosine, double x) {
  if (n % 2 == 1) {
    const int m = (n - 1) / 2;
    return cosine ? 2.0 * cheb(Kind::T, m, x) + cheb(Kind::T, m + 1, x)
                  : 2.0 * cheb(Kind::U, m - 1, x) + cheb(Kind::U, m, x);
  }
  const int m = (n - 2) / 2;
  return cosine ? 2.0 * cheb(Kind::V, m, x) + cheb(Kind::V, m + 1, x)
                : 2.0 * cheb(Kind::W, m, x) + cheb(Kind::W, m + 1, x);
}

/// Component k (1-based) of an eigenvector with the family factor dropped.
double family_component(int n, bool cosine, int k, double x) {
  const int q = n + 1 - 2 * k;  // argument q p / 2
  const int aq = std::abs(q);
  const double sign = q < 0 ? -1.0 : 1.0;
  if (n % 2 == 1) {
    const int l = aq / 2;
    return cosine ? cheb(Kind::T, l, x) : sign * cheb(Kind::U, l - 1, x);
  }
  const int l = (aq - 1) / 2;
  return cosine ? cheb(Kind::V, l, x) : sign * cheb(Kind::W, l, x);
}

std::vector<double> family_roots(int n, bool cosine, int count) {
  // The tridiagonal block has its spectrum inside [-2, 1]; sample the band
  // uniformly in p and the localized range below -1 uniformly in lam.
  for (int mesh = 8 * n; mesh <= 8 * n * 1024; mesh *= 2) {
    std::vector<double> xs;
    for (int i = 0; i <= mesh; ++i) xs.push_back(-2.5 + 1.5 * i / mesh);
    for (int i = 1; i <= mesh; ++i) xs.push_back(-std::cos(std::numbers::pi * i / mesh));
    xs.push_back(1.5);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto f = [&](double x) { return family_equation(n, cosine, x); };
    std::vector<double> roots;
    double f0 = f(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double f1 = f(xs[i]);
      if (f0 == 0.0) {
        roots.push_back(xs[i - 1]);
      } else if (f0 * f1 < 0.0) {
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(f, xs[i - 1], xs[i], f0, f1,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
        roots.push_back(0.5 * (r.first + r.second));
      }
      f0 = f1;
    }
    if (static_cast<int>(roots.size()) == count) return roots;
  }
  throw SpinxferError("root bracketing failed for n = " + std::to_string(n));
}

}  // namespace

std::vector<double> solve_lambda(int n) {
  if (n < 2) throw SpinxferError("analytic chain needs n >= 2");
  const int n1 = n - n / 2;
  auto roots = family_roots(n, true, n1);
  const auto s = family_roots(n, false, n - n1);
  roots.insert(roots.end(), s.begin(), s.end());
  return roots;
}

std::vector<cplx> solve_pj(int n) {
  std::vector<cplx> p;
  for (double x : solve_lambda(n)) {
    if (x < -1.0) p.emplace_back(std::numbers::pi, std::acosh(-x));
    else p.emplace_back(std::acos(std::min(1.0, x)), 0.0);
  }
  return p;
}

double printed_normalization(int n, double p, bool cosine_family) {
  const double sp = std::sin(p);
  // sin((n-2)p) / sin p, with the p -> 0, pi limits
  double ratio;
  if (std::abs(sp) > 1e-12) {
    ratio = std::sin((n - 2) * p) / sp;
  } else {
    const double c = std::cos(p) > 0 ? 1.0 : -1.0;
    ratio = (n - 2) * std::pow(c, n - 3);
  }
  const double v = cosine_family ? 0.5 * (n - 2) + (1.0 + std::cos((n - 1) * p)) + 0.5 * ratio
                                 : 0.5 * (n - 2) + (1.0 - std::cos((n - 1) * p)) - 0.5 * ratio;
  return v > 0.0 ? 1.0 / std::sqrt(v) : std::numeric_limits<double>::infinity();
}

AnalyticChain eigen_system(int n) {
  AnalyticChain c;
  c.n = n;
  c.n1 = n - n / 2;
  const auto lam = solve_lambda(n);
  c.p = solve_pj(n);
  c.lam = Eigen::Map<const VectorXd>(lam.data(), n);
  c.u.resize(n, n);
  c.a.resize(n);
  for (int j = 0; j < n; ++j) {
    const bool cosine = j < c.n1;
    VectorXd col(n);
    VectorXcd trig(n);
    for (int k = 1; k <= n; ++k) {
      col(k - 1) = family_component(n, cosine, k, lam[j]);
      const cplx arg = 0.5 * static_cast<double>(n + 1 - 2 * k) * c.p[j];
      trig(k - 1) = cosine ? std::cos(arg) : std::sin(arg);
    }
    c.u.col(j) = col / col.norm();
    const double tn = trig.norm();
    c.a(j) = tn > 1e-10 ? 1.0 / tn : std::numeric_limits<double>::infinity();
  }
  return c;
}

MatrixXcd transfer_amplitudes(const AnalyticChain& c, double tau) {
  VectorXcd ph(c.n);
  for (int j = 0; j < c.n; ++j) ph(j) = std::exp(-kI * (c.lam(j) * tau));
  return c.u.cast<cplx>() * ph.asDiagonal() * c.u.transpose().cast<cplx>();
}

namespace {

/// 2x2 block of f between receiver (n-1, n) and sender (1, 2).
Eigen::Matrix2cd receiver_sender_block(const AnalyticChain& c, double tau) {
  Eigen::Matrix2cd f = Eigen::Matrix2cd::Zero();
  for (int j = 0; j < c.n; ++j) {
    const cplx ph = std::exp(-kI * (c.lam(j) * tau));
    for (int r = 0; r < 2; ++r)
      for (int m = 0; m < 2; ++m) f(r, m) += c.u(c.n - 2 + r, j) * ph * c.u(m, j);
  }
  return f;
}

Eigen::Matrix2cd receiver_block(const Eigen::Matrix2cd& f, double a11, double a22, cplx a12) {
  Eigen::Matrix2cd s;
  s << a11, a12, std::conj(a12), a22;
  return f * s * f.adjoint();
}

AnalyticSenderState solve_sender(const Eigen::Matrix2cd& f) {
  // Unknowns (a00, a11, a22, Re a12, Im a12); the receiver block is real-linear in them.
  const Eigen::Matrix2cd b[4] = {receiver_block(f, 1, 0, 0), receiver_block(f, 0, 1, 0), receiver_block(f, 0, 0, 1),
                                 receiver_block(f, 0, 0, kI)};
  Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
  for (int v = 0; v < 4; ++v) {
    a(0, 1 + v) = b[v](0, 1).real();
    a(1, 1 + v) = b[v](0, 1).imag();
    a(2, 1 + v) = b[v](1, 1).real();
    a(3, 1 + v) = b[v](0, 0).real();
  }
  a(0, 3) -= 1.0;
  a(1, 4) -= 1.0;
  a(2, 2) -= 1.0;
  a(3, 0) -= 1.0;
  a(4, 0) = a(4, 1) = a(4, 2) = 1.0;
  Eigen::Matrix<double, 5, 1> rhs = Eigen::Matrix<double, 5, 1>::Zero();
  rhs(4) = 1.0;

  AnalyticSenderState s;
  const Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(a);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) {
    s.singular = true;
    return s;
  }
  const Eigen::Matrix<double, 5, 1> x = lu.solve(rhs);
  s.a00 = x(0);
  s.a11 = x(1);
  s.a22 = x(2);
  s.a12 = {x(3), x(4)};
  const auto r = receiver_block(f, s.a11, s.a22, s.a12);
  s.residual = std::max({std::abs(r(0, 1) - s.a12), std::abs(r(1, 1).real() - s.a22),
                         std::abs(r(0, 0).real() - s.a00), std::abs(s.a00 + s.a11 + s.a22 - 1.0)});
  return s;
}

}  // namespace

AnalyticSenderState self_consistent_sender(const AnalyticChain& c, double tau) {
  if (c.n < 4) throw SpinxferError("self-consistent sender needs n >= 4");
  return solve_sender(receiver_sender_block(c, tau));
}

SPoint scan_s(int n, const ScanSOptions& opt) {
  if (opt.points < 2) throw SpinxferError("scan_s: need at least two grid points");
  const AnalyticChain c = eigen_system(n);
  const double lo = std::log10(opt.tau_min), hi = opt.window_exponent * n;
  if (!(hi > lo)) throw SpinxferError("scan_s: empty tau window");
  auto value = [&](double tau) {
    const auto s = self_consistent_sender(c, tau);
    return s.singular ? -1.0 : std::abs(s.a12);
  };
  SPoint best{n, -1.0, 0.0};
  int ib = 0;
  std::vector<double> taus(opt.points);
  for (int i = 0; i < opt.points; ++i) {
    taus[i] = std::pow(10.0, lo + (hi - lo) * i / (opt.points - 1));
    const double v = value(taus[i]);
    if (v > best.s) {
      best.s = v;
      best.tau0 = taus[i];
      ib = i;
    }
  }
  if (opt.refine) {
    const double a = taus[std::max(ib - 1, 0)], b = taus[std::min(ib + 1, opt.points - 1)];
    std::uintmax_t iters = 100;
    const auto [t, fv] = boost::math::tools::brent_find_minima([&](double x) { return -value(x); }, a, b, 40, iters);
    if (-fv > best.s) {
      best.s = -fv;
      best.tau0 = t;
    }
  }
  return best;
}

}  // namespace spinxfer
