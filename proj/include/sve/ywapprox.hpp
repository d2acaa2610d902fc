#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace sve {

/// A smooth approximation of |x|: phi'' = psi(|x|), where psi >= 0 lives on
/// [lo, hi], integrates to one and stays below bound(x) = 2 g(x) for a
/// reference profile g with unit mass on [lo, hi].
///
/// psi = c * bump(u(x)) * g(x), where u is the fraction of the mass of g below x
/// and bump is a C-infinity cutoff equal to 1 on the middle 80% of [0, 1].
/// phi and phi' come from a 2^16-point log-uniform lattice; psi is exact.
class Mollifier {
 public:
  using Profile = std::function<double(double)>;

  /// `mass_coordinate` may be empty, in which case u is tabulated from g.
  Mollifier(double lo, double hi, Profile g, Profile mass_coordinate = {});

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double normalization() const noexcept { return c_; }

  double psi(double x) const;
  double bound(double x) const;  // 2 g(x) on (lo, hi), +inf elsewhere
  double phi(double x) const;
  double phi_prime(double x) const;
  double phi_second(double x) const { return psi(std::abs(x)); }

  /// Lattice mass of psi; 1 up to rounding by construction.
  double total_mass() const noexcept;

  /// A copy with psi multiplied by `factor` (phi and phi' unchanged).
  Mollifier scaled_psi(double factor) const;

  /// Lattice nodes as CSV `x,phi,phi_prime,phi_second`.
  void write_csv(std::ostream& out) const;

  static constexpr std::size_t kLatticeSize = std::size_t{1} << 16;

 private:
  struct Table;
  double u_of(double x) const;

  double lo_;
  double hi_;
  double log_lo_;
  double log_step_;
  double c_ = 1.0;
  double psi_scale_ = 1.0;
  Profile g_;
  Profile mass_;
  std::shared_ptr<const Table> table_;
};

/// C-infinity cutoff on [0, 1]: 0 at both ends, 1 on [0.1, 0.9].
double bump(double u) noexcept;

struct YWSmoother {
  double delta = 2.0;
  double eps = 1.0;
  Mollifier profile;
};

/// psi supported on [eps/delta, eps] with psi(x) <= 2 / (x ln delta).
YWSmoother build_smoother(double delta, double eps);

struct YWSequence {
  std::function<double(double)> rho;
  std::vector<double> a;            // a[0] = 1, strictly decreasing
  std::vector<Mollifier> profiles;  // profiles[n - 1] is psi_n on (a[n], a[n-1])

  const Mollifier& operator[](std::size_t n) const { return profiles.at(n - 1); }
  std::size_t size() const noexcept { return profiles.size(); }
};

/// Thresholds with int_{a[n]}^{a[n-1]} rho^-2 = n and the matching profiles.
YWSequence build_yw_sequence(const std::function<double(double)>& rho, std::size_t n_max);

/// Only the thresholds, without tabulating profiles.
std::vector<double> yw_thresholds(const std::function<double(double)>& rho, std::size_t n_max);

struct InequalityCheck {
  bool passed = true;
  double worst_margin = 0.0;
  double worst_point = 0.0;
  int worst_bound = 0;  // 1: |phi'| <= 1, 2: phi'' <= bound, 3: |x| <= phi + hi
};

/// Checks 0 <= |phi'| <= 1, phi''(x) <= bound(|x|) and |x| <= phi(x) + hi at each point.
InequalityCheck verify_smoother_inequalities(const Mollifier& m, std::span<const double> points);
inline InequalityCheck verify_smoother_inequalities(const YWSmoother& s, std::span<const double> points) {
  return verify_smoother_inequalities(s.profile, points);
}

/// delta = 2^(rate m^5), eps = 2^(-(1+2 xi) beta m^5 / 2) and
/// C_m = 2^(-beta m^5) + m^-5 2^(-(1+2 xi) beta xi m^5) + m^-5 2^(-((1+2 xi) beta / 2 - rate) m^5),
/// with base-2 logarithms for when the values leave the double range.
struct CauchyConstants {
  double delta = 0.0;
  double eps = 0.0;
  double c_m = 0.0;
  double log2_delta = 0.0;
  double log2_eps = 0.0;
  double log2_c_m = 0.0;
};

CauchyConstants cauchy_constants(int m, double beta, double xi, double rate);

}  // namespace sve
