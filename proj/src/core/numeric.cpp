#include "numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "sve/error.hpp"

namespace sve::numeric {

double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  if (lo == hi) return 0.0;
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, rel_tol, &error);
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::quadrature_failure, "non-finite adaptive quadrature result");
  }
  return value;
}

double integrate_log(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorKind::quadrature_failure, "log-substituted quadrature needs 0 < lo <= hi");
  }
  auto g = [&f](double y) {
    const double x = std::exp(y);
    return f(x) * x;
  };
  return integrate(g, std::log(lo), std::log(hi), rel_tol);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) {
    throw Error(ErrorKind::degenerate, "least squares needs at least two points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::degenerate, "least squares with a single abscissa");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace sve::numeric
