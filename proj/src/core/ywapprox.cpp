#include "sve/ywapprox.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "numeric.hpp"
#include "sve/coeff.hpp"
#include "sve/error.hpp"

namespace sve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double smooth_step(double v) noexcept {
  auto f = [](double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; };
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double a = f(v);
  return a / (a + f(1.0 - v));
}

}  // namespace

double bump(double u) noexcept {
  if (!(u > 0.0) || !(u < 1.0)) return 0.0;
  if (u < 0.1) return smooth_step(u / 0.1);
  if (u > 0.9) return smooth_step((1.0 - u) / 0.1);
  return 1.0;
}

// ---------------------------------------------------------------------------

struct Mollifier::Table {
  std::vector<double> u;        // mass coordinate at each node
  std::vector<double> psi_cdf;  // phi' at each node, in [0, 1]
  std::vector<double> phi;      // phi at each node
};

Mollifier::Mollifier(double lo, double hi, Profile g, Profile mass_coordinate)
    : lo_(lo), hi_(hi), g_(std::move(g)), mass_(std::move(mass_coordinate)) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::invalid_parameter, "mollifier support needs 0 < lo < hi");
  }
  const std::size_t n = kLatticeSize;
  log_lo_ = std::log(lo_);
  log_step_ = (std::log(hi_) - log_lo_) / static_cast<double>(n - 1);

  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::exp(log_lo_ + static_cast<double>(k) * log_step_);
  x.front() = lo_;
  x.back() = hi_;

  auto table = std::make_shared<Table>();
  table->u.assign(n, 0.0);
  std::vector<double> gx(n);
  for (std::size_t k = 0; k < n; ++k) gx[k] = g_(x[k]);
  if (mass_) {
    for (std::size_t k = 0; k < n; ++k) table->u[k] = mass_(x[k]);
  } else {
    // Trapezoid in y = log x of g(e^y) e^y, then scaled so u(hi) = 1.
    for (std::size_t k = 1; k < n; ++k) {
      table->u[k] = table->u[k - 1] + 0.5 * log_step_ * (gx[k - 1] * x[k - 1] + gx[k] * x[k]);
    }
    const double total = table->u.back();
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw Error(ErrorKind::construction_failure, "reference profile has no finite positive mass");
    }
    for (double& u : table->u) u /= total;
    table->u.back() = 1.0;
  }

  std::vector<double> shape(n);
  for (std::size_t k = 0; k < n; ++k) shape[k] = bump(table->u[k]) * gx[k];
  std::vector<double> mass(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    mass[k] = mass[k - 1] + 0.5 * log_step_ * (shape[k - 1] * x[k - 1] + shape[k] * x[k]);
  }
  const double total = mass.back();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::construction_failure, "bump-truncated profile has no finite positive mass");
  }
  c_ = 1.0 / total;

  for (std::size_t k = 0; k < n; ++k) {
    if (c_ * shape[k] > 2.0 * gx[k]) {
      std::ostringstream os;
      os << "normalized profile exceeds its bound at x = " << x[k] << " (c = " << c_ << ")";
      throw Error(ErrorKind::construction_failure, os.str());
    }
  }

  table->psi_cdf.resize(n);
  for (std::size_t k = 0; k < n; ++k) table->psi_cdf[k] = mass[k] / total;
  table->phi.assign(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    table->phi[k] = table->phi[k - 1] + 0.5 * (x[k] - x[k - 1]) * (table->psi_cdf[k - 1] + table->psi_cdf[k]);
  }
  table_ = std::move(table);
}

double Mollifier::u_of(double x) const {
  if (mass_) return mass_(x);
  const double pos = (std::log(x) - log_lo_) / log_step_;
  const auto& u = table_->u;
  if (pos <= 0.0) return 0.0;
  if (pos >= static_cast<double>(u.size() - 1)) return 1.0;
  const auto k = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(k);
  return u[k] + w * (u[k + 1] - u[k]);
}

double Mollifier::psi(double x) const {
  if (!(x > lo_) || !(x < hi_)) return 0.0;
  return psi_scale_ * c_ * bump(u_of(x)) * g_(x);
}

double Mollifier::bound(double x) const {
  if (!(x > lo_) || !(x < hi_)) return kInf;
  return 2.0 * g_(x);
}

namespace {

// Linear interpolation of a lattice column at a in (lo, hi).
double interpolate(const std::vector<double>& column, double log_lo, double log_step, double a) {
  const double pos = (std::log(a) - log_lo) / log_step;
  if (pos <= 0.0) return column.front();
  if (pos >= static_cast<double>(column.size() - 1)) return column.back();
  const auto k = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(k);
  return column[k] + w * (column[k + 1] - column[k]);
}

}  // namespace

double Mollifier::phi(double x) const {
  const double a = std::abs(x);
  if (a <= lo_) return 0.0;
  if (a >= hi_) return table_->phi.back() + (a - hi_);
  return interpolate(table_->phi, log_lo_, log_step_, a);
}

double Mollifier::phi_prime(double x) const {
  const double a = std::abs(x);
  double v = 0.0;
  if (a <= lo_) {
    v = 0.0;
  } else if (a >= hi_) {
    v = 1.0;
  } else {
    v = interpolate(table_->psi_cdf, log_lo_, log_step_, a);
  }
  return x < 0.0 ? -v : v;
}

double Mollifier::total_mass() const noexcept { return psi_scale_ * table_->psi_cdf.back(); }

Mollifier Mollifier::scaled_psi(double factor) const {
  Mollifier copy = *this;
  copy.psi_scale_ *= factor;
  return copy;
}

void Mollifier::write_csv(std::ostream& out) const {
  out << "x,phi,phi_prime,phi_second\n" << std::setprecision(17);
  const std::size_t n = table_->phi.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k + 1 == n ? hi_ : (k == 0 ? lo_ : std::exp(log_lo_ + static_cast<double>(k) * log_step_));
    out << x << ',' << table_->phi[k] << ',' << table_->psi_cdf[k] << ',' << psi(x) << '\n';
  }
}

// ---------------------------------------------------------------------------

YWSmoother build_smoother(double delta, double eps) {
  if (!(delta > 1.0) || !std::isfinite(delta)) throw Error(ErrorKind::invalid_parameter, "delta must exceed 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::invalid_parameter, "eps must be positive");
  const double lo = eps / delta;
  const double log_delta = std::log(delta);
  auto g = [log_delta](double x) { return 1.0 / (x * log_delta); };
  auto u = [lo, log_delta](double x) { return std::log(x / lo) / log_delta; };
  return YWSmoother{delta, eps, Mollifier(lo, eps, g, u)};
}

namespace {

void require_yw_modulus(const std::function<double(double)>& rho) {
  if (!rho) throw Error(ErrorKind::invalid_parameter, "modulus rho is empty");
  if (!check_modulus_shape(rho)) {
    throw Error(ErrorKind::invalid_parameter, "rho must vanish at 0 and increase strictly");
  }
  const auto audit = audit_yw_divergence(rho);
  if (!audit.passed) {
    throw Error(ErrorKind::divergence_audit, "int_0 rho^-2 does not look divergent: " + audit.detail);
  }
}

double next_threshold(const std::function<double(double)>& rho, double prev, std::size_t n) {
  auto inv_sq = [&rho](double x) {
    const double r = rho(x);
    return 1.0 / (r * r);
  };
  const double target = static_cast<double>(n);
  auto excess = [&](double a) { return numeric::integrate_log(inv_sq, a, prev, 1e-14) - target; };

  // Shrink the lower end until the integral overshoots n; the ratio squares each time.
  double lo = 0.5 * prev;
  double hi = prev;
  for (;;) {
    double f = 0.0;
    try {
      f = excess(lo);
    } catch (const Error&) {
      f = std::numeric_limits<double>::quiet_NaN();
    }
    if (f > 0.0) break;
    if (!(f <= 0.0)) {
      throw Error(ErrorKind::root_not_bracketed,
                  "threshold a[" + std::to_string(n) + "] could not be bracketed (non-finite integral)");
    }
    hi = lo;
    const double ratio = prev / lo;
    lo = prev / (ratio * ratio);
    if (!(lo >= std::numeric_limits<double>::min())) {
      throw Error(ErrorKind::root_not_bracketed,
                  "threshold a[" + std::to_string(n) + "] underflows the floating-point range");
    }
  }

  for (int iter = 0; iter < 400; ++iter) {
    const double mid = hi / lo > 2.0 ? std::sqrt(lo) * std::sqrt(hi) : lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * hi) break;
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace

std::vector<double> yw_thresholds(const std::function<double(double)>& rho, std::size_t n_max) {
  if (n_max == 0) throw Error(ErrorKind::invalid_parameter, "n_max must be positive");
  require_yw_modulus(rho);
  std::vector<double> a{1.0};
  for (std::size_t n = 1; n <= n_max; ++n) a.push_back(next_threshold(rho, a.back(), n));
  return a;
}

YWSequence build_yw_sequence(const std::function<double(double)>& rho, std::size_t n_max) {
  YWSequence seq;
  seq.rho = rho;
  seq.a = yw_thresholds(rho, n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double scale = static_cast<double>(n);
    auto g = [rho, scale](double x) {
      const double r = rho(x);
      return 1.0 / (scale * r * r);
    };
    seq.profiles.emplace_back(seq.a[n], seq.a[n - 1], g);
  }
  return seq;
}

// ---------------------------------------------------------------------------

InequalityCheck verify_smoother_inequalities(const Mollifier& m, std::span<const double> points) {
  InequalityCheck check;
  double worst = kInf;
  auto consider = [&](double margin, double x, int which) {
    if (std::isnan(margin)) margin = -kInf;
    if (margin < worst) {
      worst = margin;
      check.worst_point = x;
      check.worst_bound = which;
    }
  };
  for (double x : points) {
    const double a = std::abs(x);
    consider(1.0 - std::abs(m.phi_prime(x)), x, 1);
    const double b = m.bound(a);
    if (std::isfinite(b)) consider(b - m.phi_second(x), x, 2);
    consider(m.phi(x) + m.hi() - a, x, 3);
  }
  check.worst_margin = std::isfinite(worst) || worst < 0.0 ? worst : 0.0;
  check.passed = worst >= 0.0;
  return check;
}

// ---------------------------------------------------------------------------

CauchyConstants cauchy_constants(int m, double beta, double xi, double rate) {
  if (m < 1) throw Error(ErrorKind::invalid_parameter, "m must be at least 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::invalid_parameter, "beta must be positive");
  if (!(xi >= 0.0 && xi <= 0.5)) throw Error(ErrorKind::invalid_parameter, "xi out of [0, 0.5]");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorKind::invalid_parameter, "rate must be positive");
  const double m5 = std::pow(static_cast<double>(m), 5);
  const double log2_m5 = 5.0 * std::log2(static_cast<double>(m));
  const double k = (1.0 + 2.0 * xi) * beta;

  CauchyConstants out;
  out.log2_delta = rate * m5;
  out.log2_eps = -k * m5 / 2.0;
  const double terms[3] = {-beta * m5, -log2_m5 - k * xi * m5, -log2_m5 - (k / 2.0 - rate) * m5};
  const double top = std::max({terms[0], terms[1], terms[2]});
  double sum = 0.0;
  for (double t : terms) sum += std::exp2(t - top);
  out.log2_c_m = top + std::log2(sum);
  out.delta = std::exp2(out.log2_delta);
  out.eps = std::exp2(out.log2_eps);
  out.c_m = std::exp2(out.log2_c_m);
  return out;
}

}  // namespace sve
