#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sve/error.hpp"
#include "sve/kernel.hpp"

using namespace sve;

namespace {

constexpr double kStep = 1e-5;

double fd_s(const KernelFn& f, double s, double t) { return (f(s + kStep, t) - f(s - kStep, t)) / (2 * kStep); }
double fd_t(const KernelFn& f, double s, double t) { return (f(s, t + kStep) - f(s, t - kStep)) / (2 * kStep); }

void check_close(double numeric, double analytic) {
  CHECK(std::abs(numeric - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
}

void check_derivatives(const KernelSpec& k) {
  INFO("kernel ", k.name);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  int checked = 0;
  while (checked < 100) {
    double s = u(rng);
    double t = u(rng);
    if (s > t) std::swap(s, t);
    if (t - s < 0.05) continue;
    ++checked;
    check_close(fd_s(k.eval, s, t), k.d1(s, t));
    check_close(fd_t(k.eval, s, t), k.d2(s, t));
    check_close(fd_t(k.d1, s, t), k.d21(s, t));
  }
}

std::vector<double> v(std::initializer_list<double> x) { return x; }

}  // namespace

TEST_CASE("built-in kernel derivatives match central differences") {
  check_derivatives(make_builtin_kernel(KernelFamily::constant, v({2.5}), 1.0));
  check_derivatives(make_builtin_kernel(KernelFamily::exponential_convolution, v({1.7}), 1.0));
  check_derivatives(make_builtin_kernel(KernelFamily::smooth_bivariate, v({0.8, 1.3}), 1.0));
  check_derivatives(make_builtin_kernel(KernelFamily::fractional, v({0.7}), 1.0));
  check_derivatives(make_builtin_kernel(KernelFamily::fractional, v({0.3}), 1.0));
}

TEST_CASE("closed forms of the built-in kernels") {
  const auto e = make_builtin_kernel(KernelFamily::exponential_convolution, v({2.0}), 1.0);
  CHECK(eval_kernel(e, 0.25, 0.75) == doctest::Approx(std::exp(-1.0)));
  CHECK(e.is_convolution);
  CHECK(e.convolution_profile(0.5) == eval_kernel(e, 0.25, 0.75));
  const auto sb = make_builtin_kernel(KernelFamily::smooth_bivariate, v({1.0, 1.0}), 1.0);
  CHECK(eval_kernel(sb, 0.5, 0.5) == doctest::Approx(1.5));
  CHECK_FALSE(sb.is_convolution);
  const auto f = make_builtin_kernel(KernelFamily::fractional, v({0.25}), 1.0);
  CHECK(eval_kernel(f, 0.0, 0.5) == doctest::Approx(std::pow(0.5, -0.25)));
  CHECK(f.outside_assumption);
  CHECK_FALSE(f.assumption_note.empty());
  CHECK_FALSE(make_builtin_kernel(KernelFamily::fractional, v({0.5}), 1.0).outside_assumption);
}

TEST_CASE("evaluation outside the triangle is a domain error") {
  const auto k = make_builtin_kernel(KernelFamily::constant, v({1.0}), 2.0);
  CHECK(eval_kernel(k, 1.0, 2.0) == 1.0);
  for (auto [s, t] : {std::pair{0.5, 0.4}, std::pair{-0.1, 0.5}, std::pair{0.5, 2.5}}) {
    try {
      eval_kernel(k, s, t);
      FAIL("expected a domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_builtin_kernel(KernelFamily::constant, v({}), 1.0), Error);
  CHECK_THROWS_AS(make_builtin_kernel(KernelFamily::exponential_convolution, v({-1.0}), 1.0), Error);
  CHECK_THROWS_AS(make_builtin_kernel(KernelFamily::fractional, v({1.5}), 1.0), Error);
  CHECK_THROWS_AS(make_builtin_kernel(KernelFamily::smooth_bivariate, v({-2.0, 1.0}), 1.0), Error);
  CHECK_THROWS_AS(make_builtin_kernel(KernelFamily::constant, v({1.0}), 0.0), Error);
  CHECK_THROWS_AS(make_builtin_kernel(KernelFamily::constant, v({NAN}), 1.0), Error);
}

TEST_CASE("unknown families list the valid names") {
  try {
    parse_kernel_family("gauss");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    for (auto name : kernel_family_names()) CHECK(msg.find(name) != std::string::npos);
  }
  for (auto name : kernel_family_names()) CHECK(to_string(parse_kernel_family(name)) == name);
}

TEST_CASE("regular kernels pass the audit") {
  for (auto [family, params] : {std::pair{KernelFamily::constant, v({1.0})},
                                std::pair{KernelFamily::exponential_convolution, v({1.0})},
                                std::pair{KernelFamily::smooth_bivariate, v({0.5, 2.0})}}) {
    const auto k = make_builtin_kernel(family, params, 1.0);
    const auto report = audit_assumption_kernels(k, k);
    INFO("kernel ", k.name);
    CHECK(report.passed());
    CHECK(report.checks.size() == 4);
    CHECK(report.grid_resolution == 64);
    for (const auto& c : report.checks) CHECK(c.margin >= 0.0);
  }
}

TEST_CASE("the singular fractional kernel fails the diagonal bound") {
  const auto k = make_builtin_kernel(KernelFamily::fractional, v({0.3}), 1.0);
  const auto report = audit_assumption_kernels(k, k);
  CHECK_FALSE(report.passed());
  const auto* diag = report.find(condition::ksigma_diag_lower_bound);
  REQUIRE(diag != nullptr);
  CHECK_FALSE(diag->passed);
  CHECK(diag->witness_s == diag->witness_t);
  // H > 1/2 vanishes on the diagonal: the witness is a finite point with margin <= 0.
  const auto k7 = make_builtin_kernel(KernelFamily::fractional, v({0.7}), 1.0);
  const auto* diag7 = audit_assumption_kernels(k7, k7).find(condition::ksigma_diag_lower_bound);
  REQUIRE(diag7 != nullptr);
  CHECK_FALSE(diag7->passed);
}

TEST_CASE("audit results are monotone in resolution for passing kernels") {
  const auto k = make_builtin_kernel(KernelFamily::smooth_bivariate, v({0.5, 2.0}), 1.0);
  for (int r : {8, 16, 32, 128}) {
    AuditOptions o;
    o.resolution = r;
    CHECK(audit_assumption_kernels(k, k, o).passed());
  }
  AuditOptions bad;
  bad.resolution = 4;
  CHECK_THROWS_AS(audit_assumption_kernels(k, k, bad), Error);
}

TEST_CASE("the audit requires the derivative handles it uses") {
  auto k = make_builtin_kernel(KernelFamily::constant, v({1.0}), 1.0);
  k.d21 = {};
  try {
    audit_assumption_kernels(k, k);
    FAIL("expected missing_derivative");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_derivative);
  }
}

TEST_CASE("expression kernels") {
  KernelExpressions src;
  src.eval = "(1 + s) * exp(-(t - s))";
  src.d1 = "(2 + s) * exp(-(t - s))";
  src.d2 = "-(1 + s) * exp(-(t - s))";
  src.d21 = "-(2 + s) * exp(-(t - s))";
  src.diag_lower_bound = 1.0;
  const auto k = make_expression_kernel(src, 1.0);
  CHECK(k.name == "expression");
  CHECK_FALSE(k.is_convolution);
  CHECK(eval_kernel(k, 0.5, 1.0) == doctest::Approx(1.5 * std::exp(-0.5)));
  check_derivatives(k);
  CHECK(audit_assumption_kernels(k, k).passed());

  KernelExpressions bad = src;
  bad.eval = "x + 1";
  CHECK_THROWS_AS(make_expression_kernel(bad, 1.0), Error);
  bad = src;
  bad.gamma = 0.7;
  CHECK_THROWS_AS(make_expression_kernel(bad, 1.0), Error);
}
