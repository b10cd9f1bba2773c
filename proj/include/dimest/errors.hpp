#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace dimest {

// Invalid argument value (non-positive bandwidth, empty cloud, out-of-range parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mismatched dimensions between points, clouds or noise specs.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The geometry cannot support the requested quantity (coincident samples, zero radius ratio).
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition of a closed-form bound does not hold (radius constraint, Gamma_+ <= 0, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested bandwidth exceeds the admissibility threshold t0.
class ThresholdError : public PreconditionError {
 public:
  ThresholdError(double t, double t0)
      : PreconditionError("bandwidth t = " + fmt(t) + " exceeds threshold t0 = " + fmt(t0)),
        t_(t),
        t0_(t0) {}

  double t() const noexcept { return t_; }
  double t0() const noexcept { return t0_; }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }

  double t_;
  double t0_;
};

// Manifold kind has no closed-form regularity parameters.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejection sampler would accept too rarely to be practical.
class RejectionBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dimest
