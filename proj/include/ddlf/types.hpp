#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ddlf {

using cplx = std::complex<double>;

// Time-frequency (or delay-Doppler) symbol array. For TF frames rows index
// the frequency step m and columns the time step n.
using Frame = Eigen::MatrixXcd;

// Sampled complex baseband signal.
using Signal = Eigen::VectorXcd;

using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline cplx expj(double phase) { return {std::cos(phase), std::sin(phase)}; }

// Errors. Everything the library throws derives from ddlf::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class PilotError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddlf
