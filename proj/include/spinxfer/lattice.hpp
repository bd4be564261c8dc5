#pragma once

#include <string>
#include <vector>

#include "spinxfer/types.hpp"

namespace spinxfer {

enum class GeometryKind { Linear, Zigzag, Rectangular };

enum class CouplingMode { IsotropicDipolar, AngularDipolar, NearestNeighbor };

GeometryKind parse_geometry_kind(const std::string& s);
CouplingMode parse_coupling_mode(const std::string& s);
std::string to_string(GeometryKind k);
std::string to_string(CouplingMode m);

/// Input for build_geometry. Lengths are in units of the x-spacing.
struct GeometrySpec {
  GeometryKind kind = GeometryKind::Linear;
  int n = 2;
  double y0 = 0.0;     // zigzag offset of even sites
  double chi = 0.0;    // field angle to the chain axis, radians
  int channels = 1;    // rectangular only
  double dy = 1.0;     // rectangular channel spacing over x-spacing
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct SpinGeometry {
  GeometryKind kind = GeometryKind::Linear;
  int n = 0;
  std::vector<Point2> coords;
  double chi = 0.0;
  double y0 = 0.0;
  int channels = 1;
  double dy = 1.0;
};

/// Symmetric coupling matrix in units of gamma^2 / Delta_x^3, zero diagonal.
struct CouplingMatrix {
  MatrixXd d;
  CouplingMode mode = CouplingMode::IsotropicDipolar;

  int size() const { return static_cast<int>(d.rows()); }
};

/// Lays out site coordinates.
///   Linear:      x = j-1, y = 0
///   Zigzag:      x = j-1, y = 0 for odd j and y0 for even j
///   Rectangular: x = floor((n-1)/K), y = ((n-1) mod K) * dy
SpinGeometry build_geometry(const GeometrySpec& spec);

/// Geometry from explicit coordinates (used for translation/mirror checks).
SpinGeometry geometry_from_coords(std::vector<Point2> coords, double chi);

/// Dipolar couplings. AngularDipolar uses (3cos^2(phi)-1)/(2 r^3) with
/// cos(phi) = (dx cos(chi) + dy sin(chi)) / r. NearestNeighbor sets
/// D_ij = 1 for |i-j| = 1 and ignores coordinates.
CouplingMatrix coupling_matrix(const SpinGeometry& geom, CouplingMode mode);

}  // namespace spinxfer
