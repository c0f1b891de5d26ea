#pragma once

#include <functional>

namespace farpt {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b].
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tol, rel_tol * |value|) or max_intervals is reached.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                double abs_tol = 1e-12, double rel_tol = 0.0, int max_intervals = 500);

} // namespace farpt
