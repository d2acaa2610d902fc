#include <doctest.h>

#include <cmath>
#include <vector>

#include "sve/analysis.hpp"

using namespace sve;

namespace {

KernelSpec kernel(KernelFamily f, std::vector<double> p, double T = 1.0) { return make_builtin_kernel(f, p, T); }

CoefficientPair coeffs(CoeffFamily f, std::vector<double> p) { return make_builtin_coeffs(f, p); }

EnsembleSpec brownian(unsigned level, std::size_t n_paths, std::uint64_t seed = 0) {
  EnsembleSpec s;
  s.k_mu = kernel(KernelFamily::constant, {1.0});
  s.k_sigma = s.k_mu;
  s.coeffs = coeffs(CoeffFamily::constant_sigma, {1.0});
  s.x0 = InitialCondition::constant(0.0);
  s.grid = DyadicGrid(1.0, level);
  s.n_paths = n_paths;
  s.base_seed = seed;
  return s;
}

CoupledProblem problem(const EnsembleSpec& s) {
  CoupledProblem pb;
  pb.k_mu = s.k_mu;
  pb.k_sigma = s.k_sigma;
  pb.coeffs = s.coeffs;
  pb.x0 = s.x0;
  pb.T = s.grid.horizon();
  pb.base_seed = s.base_seed;
  pb.n_paths = s.n_paths;
  return pb;
}

// Deterministic paths X(t) = f(t) on a grid.
VectorPathSource synthetic(unsigned level, std::size_t n, double (*f)(double)) {
  const DyadicGrid g(1.0, level);
  std::vector<PathSample> paths(n);
  for (auto& p : paths) {
    p.grid = g;
    for (std::size_t j = 0; j <= g.n_steps(); ++j) p.values.push_back(f(g.point(j)));
  }
  return VectorPathSource(g, std::move(paths));
}

std::vector<double> lag_steps(const DyadicGrid& g, std::initializer_list<int> steps) {
  std::vector<double> out;
  for (int s : steps) out.push_back(s * g.dt());
  return out;
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

TEST_CASE("moments of the zero process vanish") {
  auto s = brownian(4, 40);
  s.coeffs = coeffs(CoeffFamily::constant_sigma, {0.0});
  const Ensemble e(s);
  const double q[] = {1.0, 2.0, 3.5};
  const auto r = estimate_moments(e, q, true);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r.sup_moment[k] == 0.0);
    CHECK(r.mc_stderr[k] == 0.0);
    CHECK(r.per_time[k].size() == 17);
  }
}

TEST_CASE("moment estimation preconditions") {
  const Ensemble small(brownian(4, 39));
  const double q[] = {2.0};
  CHECK(kind_of([&] { estimate_moments(small, q); }) == ErrorKind::insufficient_paths);
  const Ensemble ok(brownian(4, 40));
  const double bad[] = {0.5};
  CHECK(kind_of([&] { estimate_moments(ok, bad); }) == ErrorKind::invalid_parameter);
  CHECK(kind_of([&] { estimate_moments(ok, std::span<const double>{}); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("Brownian second moment peaks at T") {
  const Ensemble e(brownian(6, 4000, 17));
  const double q[] = {2.0};
  const auto r = estimate_moments(e, q);
  CHECK(r.mc_stderr[0] > 0.0);
  CHECK(std::abs(r.sup_moment[0] - 1.0) <= 3.0 * r.mc_stderr[0] + 0.01);
  CHECK(r.argmax[0] >= 48);
}

TEST_CASE("OU fourth moment stays below the Gaussian stationary bound") {
  auto s = brownian(7, 4000, 5);
  s.coeffs = coeffs(CoeffFamily::linear_ou, {1.0, 1.0});
  const Ensemble e(s);
  const double q[] = {4.0};
  const auto r = estimate_moments(e, q);
  const double stationary_var = 0.5;
  CHECK(r.sup_moment[0] <= 3.0 * stationary_var * stationary_var * 1.1);
}

TEST_CASE("jackknife error roughly halves when the path count quadruples") {
  const double q[] = {2.0};
  double small = 0.0;
  double large = 0.0;
  for (std::uint64_t rep = 0; rep < 6; ++rep) {
    small += estimate_moments(Ensemble(brownian(3, 400, 1000000 * rep)), q).mc_stderr[0];
    large += estimate_moments(Ensemble(brownian(3, 1600, 1000000 * rep + 500000)), q).mc_stderr[0];
  }
  const double ratio = large / small;
  CHECK(ratio >= 0.5 * 0.7);
  CHECK(ratio <= 0.5 * 1.3);
}

TEST_CASE("Hölder exponent of a linear path is one") {
  const auto src = synthetic(10, 3, [](double t) { return t; });
  const auto lags = lag_steps(src.grid(), {4, 8, 16, 32, 64, 128});
  const auto est = estimate_holder_exponent(src, 4.0, lags);
  CHECK(est.beta_hat >= 0.98);
  CHECK(est.beta_hat <= 1.02);
  CHECK(est.r_squared > 0.999);
  CHECK(est.lags.size() == 6);
  CHECK(est.dropped.empty());
}

TEST_CASE("Hölder exponent of Brownian paths is about one half") {
  const Ensemble e(brownian(10, 200, 3));
  const auto lags = lag_steps(e.grid(), {4, 8, 16, 32, 64, 128});
  const auto est = estimate_holder_exponent(e, 2.0, lags);
  CHECK(est.beta_hat >= 0.45);
  CHECK(est.beta_hat <= 0.55);
}

TEST_CASE("Hölder preconditions") {
  const auto constant = synthetic(8, 2, [](double) { return 3.0; });
  const auto g = constant.grid();
  CHECK(kind_of([&] { estimate_holder_exponent(constant, 2.0, lag_steps(g, {4, 8, 16, 32})); }) ==
        ErrorKind::degenerate);
  CHECK(kind_of([&] { admissible_lags(g, lag_steps(g, {4, 8})); }) == ErrorKind::invalid_parameter);
  // Too short and too long lags are dropped before counting.
  CHECK(kind_of([&] { admissible_lags(g, lag_steps(g, {1, 2, 4, 8, 16, 64, 128})); }) ==
        ErrorKind::invalid_parameter);
  CHECK(kind_of([&] { admissible_lags(g, std::vector<double>{0.003, 0.1, 0.2, 0.3}); }) ==
        ErrorKind::invalid_parameter);
  const auto kept = admissible_lags(DyadicGrid(1.0, 10), lag_steps(DyadicGrid(1.0, 10), {2, 4, 8, 16, 32, 512}));
  CHECK(kept.size() == 4);
  const auto est = estimate_holder_exponent(synthetic(10, 1, [](double t) { return t * t; }), 2.0,
                                            lag_steps(DyadicGrid(1.0, 10), {2, 4, 8, 16, 32, 512}));
  CHECK(est.dropped.size() == 2);
}

TEST_CASE("Cauchy gaps vanish for identical levels") {
  auto s = brownian(0, 8, 4);
  s.coeffs = coeffs(CoeffFamily::linear_ou, {1.0, 1.0});
  s.k_mu = kernel(KernelFamily::exponential_convolution, {1.0});
  s.k_sigma = s.k_mu;
  const unsigned levels[] = {6, 6};
  const auto r = measure_cauchy_gaps(problem(s), levels, SchemeConfig{});
  REQUIRE(r.gaps.size() == 1);
  CHECK(r.gaps[0] == 0.0);
  CHECK(std::isnan(r.fitted_rate));
  const unsigned one[] = {6};
  CHECK(kind_of([&] { measure_cauchy_gaps(problem(s), one, SchemeConfig{}); }) == ErrorKind::invalid_parameter);
  const unsigned down[] = {6, 5};
  CHECK(kind_of([&] { measure_cauchy_gaps(problem(s), down, SchemeConfig{}); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("deterministic Volterra gaps decay at first order") {
  auto s = brownian(0, 2);
  s.coeffs = coeffs(CoeffFamily::constant_sigma, {0.0, 1.0});
  s.k_mu = kernel(KernelFamily::smooth_bivariate, {0.5, 1.0});
  const unsigned levels[] = {4, 5, 6, 7, 8, 9};
  const auto r = measure_cauchy_gaps(problem(s), levels, SchemeConfig{});
  CHECK(r.gap_levels == std::vector<unsigned>{4, 5, 6, 7, 8});
  CHECK(r.fitted_rate <= -0.9);
  for (std::size_t k = 1; k < r.gaps.size(); ++k) CHECK(r.gaps[k] < r.gaps[k - 1]);
}

TEST_CASE("Cauchy gaps do not depend on the worker count") {
  auto s = brownian(0, 23, 9);
  s.coeffs = coeffs(CoeffFamily::holder_power, {1.0, 0.0});
  s.x0 = InitialCondition::constant(1.0);
  const unsigned levels[] = {3, 4, 5};
  const auto a = measure_cauchy_gaps(problem(s), levels, SchemeConfig{}, RunOptions{1, 64});
  const auto b = measure_cauchy_gaps(problem(s), levels, SchemeConfig{}, RunOptions{4, 3});
  CHECK(a.gaps == b.gaps);
  CHECK(a.gap_witness == b.gap_witness);
}

TEST_CASE("coupling test") {
  auto s = brownian(0, 16, 2);
  s.coeffs = coeffs(CoeffFamily::linear_ou, {1.0, 1.0});
  s.k_mu = kernel(KernelFamily::exponential_convolution, {1.0});
  s.k_sigma = s.k_mu;
  const unsigned levels[] = {4, 5, 6};
  SchemeConfig a;
  CHECK(kind_of([&] { uniqueness_coupling_test(problem(s), levels, a, a); }) == ErrorKind::identical_config);

  SchemeConfig generic = a;
  generic.weight_route = WeightRoute::generic;
  SchemeConfig tabulated = a;
  tabulated.weight_route = WeightRoute::tabulated;
  const auto control = uniqueness_coupling_test(problem(s), levels, generic, tabulated);
  for (double g : control.gaps) CHECK(g == 0.0);
  CHECK(control.verdict == kVerdictConsistent);

  SchemeConfig averaged = a;
  averaged.kernel_quadrature = KernelQuadrature::averaged;
  const auto r = uniqueness_coupling_test(problem(s), levels, a, averaged);
  CHECK(r.gap_levels == r.levels);
  for (double g : r.gaps) CHECK(g > 0.0);
}

TEST_CASE("decomposition collapses to the scheme sums for unit kernels") {
  auto s = brownian(10, 1, 6);
  s.coeffs = coeffs(CoeffFamily::linear_ou, {1.5, 0.8});
  s.x0 = InitialCondition::constant(0.3);
  s.scheme.store_aux = true;
  const auto path = Ensemble(s).path(0);
  const auto r = reconstruct_semimartingale(path, s.k_mu, s.k_sigma, s.x0, true);
  CHECK(r.residual_sup <= 1e-10 * static_cast<double>(s.grid.n_steps()));
  CHECK(r.martingale.size() == s.grid.n_steps() + 1);
  CHECK(r.drift.back() == path.aux_z.back());
}

TEST_CASE("deterministic decomposition matches a closed-form geometric sum") {
  // sigma = 0, mu = 1, K_mu(s,t) = e^{-(t-s)}: both the scheme and the
  // reconstruction are geometric sums in q = e^{-dt}.
  auto s = brownian(12, 1);
  s.coeffs = coeffs(CoeffFamily::constant_sigma, {0.0, 1.0});
  s.k_mu = kernel(KernelFamily::exponential_convolution, {1.0});
  s.k_sigma = s.k_mu;
  s.scheme.store_aux = true;
  const auto path = Ensemble(s).path(0);
  const auto r = reconstruct_semimartingale(path, s.k_mu, s.k_sigma, s.x0);

  const long double dt = 1.0L / 4096.0L;
  const long double q = std::exp(-dt);
  long double oracle = 0.0L;
  for (std::size_t j = 1; j <= 4096; ++j) {
    const long double jj = static_cast<long double>(j);
    const long double scheme = dt * q * (1.0L - std::pow(q, jj)) / (1.0L - q);
    const long double drift = jj * dt - dt * dt * q / (1.0L - q) * (jj - (1.0L - std::pow(q, jj)) / (1.0L - q));
    oracle = std::max(oracle, std::abs(scheme - drift));
  }
  CHECK(std::abs(r.residual_sup - static_cast<double>(oracle)) <= 1e-6);
  // The residual itself is a first-order quadrature error.
  CHECK(r.residual_sup > 0.0);
  CHECK(r.residual_sup < 1e-3);
}

TEST_CASE("decomposition preconditions") {
  auto s = brownian(4, 1);
  const auto path = Ensemble(s).path(0);
  CHECK(kind_of([&] { reconstruct_semimartingale(path, s.k_mu, s.k_sigma, s.x0); }) == ErrorKind::missing_aux);
  s.scheme.store_aux = true;
  const auto with_aux = Ensemble(s).path(0);
  auto no_d2 = s.k_mu;
  no_d2.d2 = {};
  CHECK(kind_of([&] { reconstruct_semimartingale(with_aux, no_d2, s.k_sigma, s.x0); }) ==
        ErrorKind::missing_derivative);
  CHECK(kind_of([&] { reconstruct_semimartingale(with_aux, s.k_mu, no_d2, s.x0); }) ==
        ErrorKind::missing_derivative);
}

TEST_CASE("decomposition study reports every level") {
  auto s = brownian(0, 8, 1);
  s.coeffs = coeffs(CoeffFamily::linear_ou, {1.0, 1.0});
  s.k_mu = kernel(KernelFamily::exponential_convolution, {1.0});
  s.k_sigma = s.k_mu;
  const unsigned levels[] = {5, 6, 7};
  const auto st = decomposition_study(problem(s), levels, SchemeConfig{});
  CHECK(st.median_residual.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(st.median_residual[k] <= st.max_residual[k]);
  CHECK(st.median_residual[2] < st.median_residual[0]);
}
