#pragma once

#include <stdexcept>
#include <string>

namespace ringo {

// Base type for all library errors so callers can catch everything from
// this project with one handler.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query parameter outside the evaluable domain of a curve.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Two curves that must share order/knots do not.
class IncompatibleCurves : public Error {
 public:
  using Error::Error;
};

// A knot span that must be positive is zero (repeated knots).
class SingularSpan : public Error {
 public:
  using Error::Error;
};

// Least-squares fit cannot determine the control points.
class FitError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration (bad field, bad range, unreadable file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Inverse kinematics target outside the reachable set.
class ReachabilityError : public Error {
 public:
  using Error::Error;
};

// Joint value outside its configured limits.
class JointLimitError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced where finite math is required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Random map generation could not satisfy its placement constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Caller-provided planning input is invalid (e.g. start inside an obstacle).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ringo
