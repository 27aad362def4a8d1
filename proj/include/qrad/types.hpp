#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qrad {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Global amplitude prefactor -i (2 pi)^{-3/2} carried by every representation.
inline const cplx amplitude_prefactor{0.0, -1.0 / (2.0 * pi * std::sqrt(2.0 * pi))};

// Exception hierarchy. Every error thrown by the library derives from Error so
// that the CLI can map categories onto exit codes.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside an operation's precondition (bad parameters, malformed data).
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class SuperluminalError : public ValidationError {
public:
  explicit SuperluminalError(const std::string& msg) : ValidationError(msg) {}
};

class UnsupportedOrderError : public ValidationError {
public:
  explicit UnsupportedOrderError(const std::string& msg) : ValidationError(msg) {}
};

class ZeroMomentumError : public ValidationError {
public:
  explicit ZeroMomentumError(const std::string& msg) : ValidationError(msg) {}
};

class SingularityError : public ValidationError {
public:
  explicit SingularityError(const std::string& msg) : ValidationError(msg) {}
};

class RangeError : public ValidationError {
public:
  explicit RangeError(const std::string& msg) : ValidationError(msg) {}
};

class GridMismatchError : public ValidationError {
public:
  explicit GridMismatchError(const std::string& msg) : ValidationError(msg) {}
};

// The requested representation of J(p) does not apply to this trajectory.
class RepresentationError : public ValidationError {
public:
  explicit RepresentationError(const std::string& msg) : ValidationError(msg) {}
};

// Truncation cutoff too small for the requested coherent amplitude.
class CutoffError : public ValidationError {
public:
  explicit CutoffError(const std::string& msg) : ValidationError(msg) {}
};

// Non-Fock out-state: a finite-norm quantity was requested but does not exist.
class NonFockError : public Error {
public:
  explicit NonFockError(const std::string& msg) : Error(msg) {}
};

// Quadrature did not reach its tolerance; carries the achieved estimate.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& msg, double estimate, double tolerance)
      : Error(msg), estimate_(estimate), tolerance_(tolerance) {}
  double estimate() const noexcept { return estimate_; }
  double tolerance() const noexcept { return tolerance_; }

private:
  double estimate_;
  double tolerance_;
};

}  // namespace qrad
