#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "d2d/errors.hpp"

namespace d2d {

struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  unsigned max_depth = 18;
  /// Probability mass discarded when truncating a semi-infinite density integral.
  double tail_mass = 1e-6;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(tail_mass > 0.0 && tail_mass < 1.0))
      throw ParameterError("quadrature tolerances must be positive (tail mass in (0,1))");
  }
};

/// Adaptive 31-point Gauss-Kronrod over [a, b]; b may be +inf.
/// Throws NumericalError if the error estimate misses the tolerance.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSettings& quad) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  if (std::isinf(b)) {
    value = GK::integrate(f, a, b, quad.max_depth, quad.rel_tol, &error, &l1);
  } else {
    // Boost reports subinterval errors without the interval scale, so short
    // ranges never meet a relative tolerance; integrate over [0, 1] instead.
    const double width = b - a;
    auto unit = [&](double u) { return width * f(a + width * u); };
    value = GK::integrate(unit, 0.0, 1.0, quad.max_depth, quad.rel_tol, &error, &l1);
  }
  const double allowed = std::max(quad.abs_tol, quad.rel_tol * l1);
  if (!std::isfinite(value) || error > allowed) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << value
        << ", error " << error << " > allowed " << allowed;
    throw NumericalError(msg.str());
  }
  return value;
}

}  // namespace d2d
