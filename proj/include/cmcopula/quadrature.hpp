#pragma once

#include <functional>

namespace cmcopula {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  int max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod integration of f over [a, b].
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls below max(abs_tol, rel_tol * |value|).
/// Throws QuadratureError when the subdivision budget runs out first.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// Single Gauss-Kronrod 15 panel; exposed for tests.
QuadratureResult gauss_kronrod15(const std::function<double(double)>& f, double a,
                                 double b);

}  // namespace cmcopula
