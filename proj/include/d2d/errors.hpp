#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

/// Invalid input to an operation (negative intensity, p_s outside [0,1], ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A transmitter sits exactly on a receiver; the pathloss model is singular there.
class SingularGeometryError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Quadrature or root finding failed to reach the requested accuracy.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The cellular coverage constraint cannot be met inside the search bracket.
class InfeasibleError : public NumericalError {
public:
  InfeasibleError(const std::string& what, double achieved, double required)
      : NumericalError(what), achieved_coverage(achieved), required_coverage(required) {}

  double achieved_coverage;
  double required_coverage;
};

}  // namespace d2d
