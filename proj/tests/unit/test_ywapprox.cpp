#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "sve/error.hpp"
#include "sve/ywapprox.hpp"

using namespace sve;

namespace {

// Composite Simpson rule in y = ln x, independent of the lattice used by Mollifier.
double mass_simpson(const Mollifier& m, int intervals = 40000) {
  const double a = std::log(m.lo());
  const double b = std::log(m.hi());
  const double h = (b - a) / intervals;
  double sum = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double y = a + k * h;
    const double x = std::exp(y);
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * m.psi(x) * x;
  }
  return sum * h / 3.0;
}

// Points on both sides of the origin: log-spaced inside the support plus a linear sweep.
std::vector<double> sample_points(double lo, double hi, int n = 10000) {
  std::vector<double> pts;
  const int inside = n / 2;
  for (int k = 0; k < inside / 2; ++k) {
    const double x = lo * std::pow(hi / lo, (k + 0.5) / (inside / 2));
    pts.push_back(x);
    pts.push_back(-x);
  }
  for (int k = 0; pts.size() < static_cast<std::size_t>(n); ++k) {
    pts.push_back(-3.0 * hi + 6.0 * hi * k / (n - inside - 1));
  }
  return pts;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("thresholds match the closed forms") {
  const auto sq = yw_thresholds([](double x) { return std::sqrt(x); }, 5);
  const auto lin = yw_thresholds([](double x) { return x; }, 5);
  CHECK(sq[0] == 1.0);
  CHECK(lin[0] == 1.0);
  double reciprocal = 1.0;
  for (int n = 1; n <= 5; ++n) {
    const double closed = std::exp(-n * (n + 1) / 2.0);
    CHECK(std::abs(sq[n] - closed) <= 1e-10 * closed);
    reciprocal += n;
    CHECK(std::abs(lin[n] - 1.0 / reciprocal) <= 1e-10 / reciprocal);
  }
}

TEST_CASE("thresholds fail cleanly") {
  const auto root = [](double x) { return std::sqrt(x); };
  CHECK(kind_of([&] { yw_thresholds(root, 40); }) == ErrorKind::root_not_bracketed);
  CHECK(kind_of([&] { yw_thresholds([](double x) { return std::pow(x, 0.25); }, 3); }) ==
        ErrorKind::divergence_audit);
  CHECK(kind_of([&] { yw_thresholds([](double x) { return x + 1.0; }, 3); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([&] { yw_thresholds(root, 0); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("bump is a smooth cutoff") {
  CHECK(bump(0.0) == 0.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-0.5) == 0.0);
  CHECK(bump(0.1) == 1.0);
  CHECK(bump(0.5) == 1.0);
  CHECK(bump(0.9) == 1.0);
  CHECK(bump(0.05) > 0.0);
  CHECK(bump(0.05) < 1.0);
  for (int k = 1; k < 100; ++k) CHECK(bump(0.001 * k) <= bump(0.001 * (k + 1)));
}

TEST_CASE("smoother psi has unit mass and satisfies the inequalities") {
  for (double delta : {2.0, 8.0, 32.0}) {
    for (double eps : {0.3, 0.1, 0.01}) {
      INFO("delta ", delta, " eps ", eps);
      const auto s = build_smoother(delta, eps);
      CHECK(mass_simpson(s.profile) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(s.profile.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
      const auto pts = sample_points(eps / delta, eps);
      const auto check = verify_smoother_inequalities(s, pts);
      CHECK(check.passed);
      CHECK(check.worst_margin >= 0.0);
      for (double x : pts) {
        const double gap = std::abs(x) - s.profile.phi(x);
        CHECK(gap >= -1e-12);
        CHECK(gap <= eps);
      }
    }
  }
}

TEST_CASE("psi stays inside its support and below the declared bound") {
  const auto s = build_smoother(8.0, 0.1);
  CHECK(s.profile.psi(0.1 / 8.0) == 0.0);
  CHECK(s.profile.psi(0.1) == 0.0);
  CHECK(s.profile.psi(0.2) == 0.0);
  CHECK(s.profile.phi(0.005) == 0.0);
  CHECK(s.profile.phi_prime(0.5) == 1.0);
  CHECK(s.profile.phi_prime(-0.5) == -1.0);
  for (double x = 0.0126; x < 0.1; x *= 1.01) {
    CHECK(s.profile.psi(x) <= 2.0 / (x * std::log(8.0)));
  }
}

TEST_CASE("corrupting psi is detected on the second bound") {
  const auto s = build_smoother(8.0, 0.1);
  const auto bad = s.profile.scaled_psi(3.0);
  const auto check = verify_smoother_inequalities(bad, sample_points(0.1 / 8.0, 0.1));
  CHECK_FALSE(check.passed);
  CHECK(check.worst_bound == 2);
  CHECK(check.worst_margin < 0.0);
}

TEST_CASE("Yamada-Watanabe sequence converges to |x|") {
  const auto rho = [](double x) { return std::sqrt(x); };
  const auto seq = build_yw_sequence(rho, 4);
  REQUIRE(seq.size() == 4);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto& m = seq[n];
    CHECK(m.lo() == seq.a[n]);
    CHECK(m.hi() == seq.a[n - 1]);
    CHECK(mass_simpson(m) == doctest::Approx(1.0).epsilon(1e-6));
    const auto pts = sample_points(m.lo(), m.hi());
    CHECK(verify_smoother_inequalities(m, pts).passed);
    for (double x : pts) {
      const double gap = std::abs(x) - m.phi(x);
      CHECK(gap >= -1e-12);
      CHECK(gap <= seq.a[n - 1]);
      // psi_n <= 2 / (n rho^2)
      CHECK(m.psi(std::abs(x)) <= 2.0 / (static_cast<double>(n) * std::abs(x)) * (1.0 + 1e-12));
    }
  }
  CHECK_THROWS(seq[0]);
}

TEST_CASE("smoother parameters are validated") {
  CHECK(kind_of([] { build_smoother(1.0, 0.1); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([] { build_smoother(2.0, 0.0); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([] { Mollifier(1.0, 0.5, [](double) { return 1.0; }); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("lattice CSV") {
  const auto s = build_smoother(2.0, 0.3);
  std::ostringstream os;
  s.profile.write_csv(os);
  const std::string text = os.str();
  CHECK(text.rfind("x,phi,phi_prime,phi_second\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == Mollifier::kLatticeSize + 1);
}

TEST_CASE("Cauchy constants") {
  const auto c = cauchy_constants(1, 0.5, 0.25, 0.1);
  const double k = 1.5 * 0.5;
  CHECK(c.delta == doctest::Approx(std::pow(2.0, 0.1)));
  CHECK(c.eps == doctest::Approx(std::pow(2.0, -k / 2.0)));
  const double expected = std::pow(2.0, -0.5) + std::pow(2.0, -k * 0.25) + std::pow(2.0, -(k / 2.0 - 0.1));
  CHECK(c.c_m == doctest::Approx(expected));
  CHECK(c.log2_c_m == doctest::Approx(std::log2(expected)));

  const auto big = cauchy_constants(20, 0.5, 0.25, 0.1);
  CHECK(std::isfinite(big.log2_c_m));
  CHECK(big.log2_c_m < 0.0);
  CHECK(std::isinf(big.delta));
  CHECK(kind_of([] { cauchy_constants(0, 0.5, 0.25, 0.1); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([] { cauchy_constants(1, 0.5, 0.7, 0.1); }) == ErrorKind::invalid_parameter);
}
