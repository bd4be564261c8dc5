#include "spinxfer/lattice.hpp"

#include <cmath>

namespace spinxfer {

GeometryKind parse_geometry_kind(const std::string& s) {
  if (s == "linear") return GeometryKind::Linear;
  if (s == "zigzag") return GeometryKind::Zigzag;
  if (s == "rectangular") return GeometryKind::Rectangular;
  throw SpinxferError("unknown geometry kind '" + s + "'");
}

CouplingMode parse_coupling_mode(const std::string& s) {
  if (s == "isotropic") return CouplingMode::IsotropicDipolar;
  if (s == "angular") return CouplingMode::AngularDipolar;
  if (s == "nearest") return CouplingMode::NearestNeighbor;
  throw SpinxferError("unknown coupling mode '" + s + "'");
}

std::string to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::Linear: return "linear";
    case GeometryKind::Zigzag: return "zigzag";
    case GeometryKind::Rectangular: return "rectangular";
  }
  return "?";
}

std::string to_string(CouplingMode m) {
  switch (m) {
    case CouplingMode::IsotropicDipolar: return "isotropic";
    case CouplingMode::AngularDipolar: return "angular";
    case CouplingMode::NearestNeighbor: return "nearest";
  }
  return "?";
}

namespace {

void check_distinct(const std::vector<Point2>& c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (std::hypot(c[j].x - c[i].x, c[j].y - c[i].y) <= 1e-12)
        throw SpinxferError("coincident sites " + std::to_string(i + 1) + " and " +
                            std::to_string(j + 1));
}

}  // namespace

SpinGeometry build_geometry(const GeometrySpec& spec) {
  if (spec.n < 2) throw SpinxferError("geometry needs at least 2 sites");
  if (spec.y0 < 0.0) throw SpinxferError("y0 must be non-negative");

  SpinGeometry g;
  g.kind = spec.kind;
  g.n = spec.n;
  g.chi = spec.chi;
  g.coords.resize(spec.n);

  switch (spec.kind) {
    case GeometryKind::Linear:
      for (int j = 0; j < spec.n; ++j) g.coords[j] = {double(j), 0.0};
      break;
    case GeometryKind::Zigzag:
      g.y0 = spec.y0;
      for (int j = 0; j < spec.n; ++j) g.coords[j] = {double(j), (j % 2 == 0) ? 0.0 : spec.y0};
      break;
    case GeometryKind::Rectangular: {
      if (spec.channels < 1) throw SpinxferError("channel count must be positive");
      if (spec.n % spec.channels != 0)
        throw SpinxferError("site count " + std::to_string(spec.n) +
                            " is not divisible by channel count " + std::to_string(spec.channels));
      if (!(spec.dy > 0.0)) throw SpinxferError("channel spacing dy must be positive");
      g.channels = spec.channels;
      g.dy = spec.dy;
      const int k = spec.channels;
      for (int m = 0; m < spec.n; ++m) g.coords[m] = {double(m / k), double(m % k) * spec.dy};
      break;
    }
  }
  check_distinct(g.coords);
  return g;
}

SpinGeometry geometry_from_coords(std::vector<Point2> coords, double chi) {
  if (coords.size() < 2) throw SpinxferError("geometry needs at least 2 sites");
  check_distinct(coords);
  SpinGeometry g;
  g.kind = GeometryKind::Zigzag;
  g.n = static_cast<int>(coords.size());
  g.coords = std::move(coords);
  g.chi = chi;
  return g;
}

CouplingMatrix coupling_matrix(const SpinGeometry& geom, CouplingMode mode) {
  const int n = geom.n;
  CouplingMatrix out;
  out.mode = mode;
  out.d = MatrixXd::Zero(n, n);
  if (mode == CouplingMode::NearestNeighbor) {
    for (int i = 0; i + 1 < n; ++i) out.d(i, i + 1) = out.d(i + 1, i) = 1.0;
    return out;
  }
  const double cx = std::cos(geom.chi);
  const double sy = std::sin(geom.chi);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = geom.coords[j].x - geom.coords[i].x;
      const double dy = geom.coords[j].y - geom.coords[i].y;
      const double r = std::hypot(dx, dy);
      if (r <= 1e-12) throw SpinxferError("zero distance between coupled sites");
      const double r3 = r * r * r;
      double v = 1.0 / r3;
      if (mode == CouplingMode::AngularDipolar) {
        const double c = (dx * cx + dy * sy) / r;
        v = (3.0 * c * c - 1.0) / (2.0 * r3);
      }
      out.d(i, j) = out.d(j, i) = v;
    }
  }
  return out;
}

}  // namespace spinxfer
