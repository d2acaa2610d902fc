#pragma once

#include <functional>
#include <span>

namespace sve::numeric {

/// Adaptive Gauss-Kronrod on [lo, hi].
double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-13);

/// Same, after substituting x = exp(y); suited to integrands with a
/// singularity at 0 and 0 < lo < hi spanning several decades.
double integrate_log(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-13);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept (fixed summation order).
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace sve::numeric
