#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spinxfer {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Bit configuration of a chain; bit i set means site i+1 is excited.
using Config = std::uint64_t;

/// Raised when an operation's preconditions are violated.
class SpinxferError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Selects between the serial reference kernel and its OpenMP counterpart.
enum class Exec { Serial, Parallel };

inline constexpr cplx kI{0.0, 1.0};

inline int popcount(Config c) { return __builtin_popcountll(c); }

}  // namespace spinxfer
