// Adaptive Gauss-Kronrod (7/15) quadrature.
#pragma once

#include <functional>
#include <span>

namespace depctl::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

struct Tolerance {
  double absolute = 1e-10;
  double relative = 1e-10;
  int max_intervals = 2000;
};

using Integrand = std::function<double(double)>;

// Integrates over [a, b]; the interval is pre-split at every point of
// `breaks` that falls strictly inside it.
Result integrate(const Integrand& f, double a, double b, Tolerance tol = {},
                 std::span<const double> breaks = {});

// Integrates over [a, inf) via the map x = a + t / (1 - t) on the tail.
Result integrate_to_infinity(const Integrand& f, double a, Tolerance tol = {},
                             std::span<const double> breaks = {});

}  // namespace depctl::quad
