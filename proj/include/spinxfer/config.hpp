#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinxfer/evolution.hpp"
#include "spinxfer/lattice.hpp"

namespace spinxfer {

/// Resolved run configuration. The file is INI-style:
///
///   [geometry]   kind n y0 chi channels dy coupling_mode
///   [partition]  sender extended_receiver controlled
///   [schedule]   komega model trotter eps
///   [solver]     trials seed tol max_iterations dedupe_tol restarts zero_tol cut_kmax
///   [tau]        min max step refine
///   [scan]       protocol param1 min1 max1 count1 param2 min2 max2 count2
///   [analytic]   n_min n_max n_step points window_exponent
///   [restore]    concurrence
///   [output]     dir
///
/// Every key is optional; unknown sections or keys are rejected.
struct RunConfig {
  GeometrySpec geometry{GeometryKind::Linear, 6};
  CouplingMode mode = CouplingMode::IsotropicDipolar;

  int sender = 2;
  int extended_receiver = -1;  // -1: same as the receiver
  int controlled = 2;

  int komega = 4;
  ModelKind model = ModelKind::StepWise;
  int trotter = 60;
  double eps = 1e-4;

  int trials = 100;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int max_iterations = 200;
  double dedupe_tol = 1e-6;
  int restarts = 8;
  double zero_tol = 1e-8;
  int cut_kmax = 2;

  double tau_min = 0.25;
  double tau_max = 60.0;
  double tau_step = 0.25;
  bool refine = true;

  std::string protocol = "full";
  std::string param1 = "y0";
  double min1 = 0.0, max1 = 0.0;
  int count1 = 1;
  std::string param2 = "chi";
  double min2 = 0.0, max2 = 0.0;
  int count2 = 1;

  int n_min = 4;
  int n_max = 20;
  int n_step = 1;
  int points = 100000;
  double window_exponent = 0.3;

  bool concurrence = false;

  std::string out_dir = "out";

  Partition partition() const;
  std::vector<double> tau_grid() const;
  std::vector<double> values1() const;
  std::vector<double> values2() const;
  /// One "section.key=value" line per key, fixed order; hashed into the manifest.
  std::string canonical() const;
};

/// Reads the file (empty path: defaults only), then applies "section.key=value" overrides.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& s);

}  // namespace spinxfer
