#include "sve/scheme.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "scheme_detail.hpp"

namespace sve {

std::string_view to_string(KernelQuadrature q) noexcept {
  return q == KernelQuadrature::left_point ? "left_point" : "averaged";
}

KernelQuadrature parse_kernel_quadrature(std::string_view name) {
  if (name == "left_point") return KernelQuadrature::left_point;
  if (name == "averaged") return KernelQuadrature::averaged;
  throw Error(ErrorKind::invalid_parameter,
              "unknown kernel_quadrature \"" + std::string(name) + "\"; valid: left_point averaged");
}

std::string_view to_string(WeightRoute r) noexcept {
  switch (r) {
    case WeightRoute::automatic: return "automatic";
    case WeightRoute::generic: return "generic";
    case WeightRoute::tabulated: return "tabulated";
  }
  return "automatic";
}

WeightRoute parse_weight_route(std::string_view name) {
  if (name == "automatic") return WeightRoute::automatic;
  if (name == "generic") return WeightRoute::generic;
  if (name == "tabulated") return WeightRoute::tabulated;
  throw Error(ErrorKind::invalid_parameter,
              "unknown weight_route \"" + std::string(name) + "\"; valid: automatic generic tabulated");
}

double drift_weight(const KernelSpec& k, const DyadicGrid& grid, const SchemeConfig& cfg, std::size_t i,
                    std::size_t j) {
  const double ti = grid.point(i);
  const double tj = grid.point(j);
  if (cfg.kernel_quadrature == KernelQuadrature::left_point) return k.eval(ti, tj) * grid.dt();
  const double h = grid.dt() / cfg.quadrature_nodes;
  double sum = 0.0;
  for (int q = 0; q < cfg.quadrature_nodes; ++q) sum += k.eval(ti + (q + 0.5) * h, tj);
  return sum * h;
}

double diffusion_weight(const KernelSpec& k, const DyadicGrid& grid, const SchemeConfig& cfg, std::size_t i,
                        std::size_t j) {
  const double ti = grid.point(i);
  const double tj = grid.point(j);
  if (cfg.kernel_quadrature == KernelQuadrature::left_point) return k.eval(ti, tj);
  const double h = grid.dt() / cfg.quadrature_nodes;
  double sum = 0.0;
  for (int q = 0; q < cfg.quadrature_nodes; ++q) sum += k.eval(ti + (q + 0.5) * h, tj);
  return sum / cfg.quadrature_nodes;
}

LagWeights convolution_fast_weights(const KernelSpec& k, const DyadicGrid& grid, const SchemeConfig& cfg) {
  if (!k.is_convolution) {
    throw Error(ErrorKind::not_convolution, "kernel " + k.name + " is not of convolution type");
  }
  if (cfg.quadrature_nodes < 1) throw Error(ErrorKind::invalid_parameter, "quadrature_nodes must be >= 1");
  const std::size_t n = grid.n_steps();
  LagWeights w;
  w.drift.assign(n + 1, 0.0);
  w.diffusion.assign(n + 1, 0.0);
  // Row i = 0 of the generic weights; for a convolution kernel every row is a shift of it.
  for (std::size_t lag = 1; lag <= n; ++lag) {
    w.drift[lag] = drift_weight(k, grid, cfg, 0, lag);
    w.diffusion[lag] = diffusion_weight(k, grid, cfg, 0, lag);
  }
  return w;
}

namespace detail {

RouteTables prepare_route(const KernelSpec& k_mu, const KernelSpec& k_sigma, const DyadicGrid& grid,
                          const SchemeConfig& cfg) {
  if (cfg.quadrature_nodes < 1) throw Error(ErrorKind::invalid_parameter, "quadrature_nodes must be >= 1");
  const bool both_convolution = k_mu.is_convolution && k_sigma.is_convolution;
  RouteTables tables;
  switch (cfg.weight_route) {
    case WeightRoute::generic:
      return tables;
    case WeightRoute::automatic:
      if (!both_convolution) return tables;
      break;
    case WeightRoute::tabulated:
      break;
  }
  tables.mu = convolution_fast_weights(k_mu, grid, cfg);
  tables.sigma = convolution_fast_weights(k_sigma, grid, cfg);
  return tables;
}

PathSample run_scheme(const KernelSpec& k_mu, const KernelSpec& k_sigma, const CoefficientPair& c,
                      const InitialCondition& x0, std::span<const double> increments, std::uint64_t seed,
                      const DyadicGrid& grid, const SchemeConfig& cfg, const RouteTables& tables) {
  const std::size_t n = grid.n_steps();
  if (increments.size() != n) {
    throw Error(ErrorKind::incompatible_grid, "increment count does not match the grid");
  }
  const double dt = grid.dt();

  PathSample path;
  path.grid = grid;
  path.driver_seed = seed;
  path.values.assign(n + 1, 0.0);
  if (cfg.store_aux) {
    path.aux_y.assign(n + 1, 0.0);
    path.aux_z.assign(n + 1, 0.0);
  }

  // drift_terms[i] = mu(t_i, X_i), noise_terms[i] = sigma(t_i, X_i) * dB_i
  std::vector<double> drift_terms(n);
  std::vector<double> noise_terms(n);

  auto fail = [&](std::size_t j) {
    std::ostringstream os;
    os << "scheme produced a non-finite value at step j = " << j << " (t = " << grid.point(j) << ")";
    PathSample partial = path;
    partial.values.resize(j + 1);
    if (cfg.store_aux) {
      partial.aux_y.resize(j + 1);
      partial.aux_z.resize(j + 1);
    }
    throw NonFiniteError(os.str(), j, std::move(partial));
  };

  auto freeze = [&](std::size_t i) {
    const double ti = grid.point(i);
    drift_terms[i] = c.mu(ti, path.values[i]);
    noise_terms[i] = c.sigma(ti, path.values[i]) * increments[i];
  };

  path.values[0] = x0.x0(0.0);
  if (!std::isfinite(path.values[0])) fail(0);
  freeze(0);

  const double* mu_drift = tables.mu ? tables.mu->drift.data() : nullptr;
  const double* sigma_diff = tables.sigma ? tables.sigma->diffusion.data() : nullptr;

  for (std::size_t j = 1; j <= n; ++j) {
    double drift = 0.0;
    double diffusion = 0.0;
    if (mu_drift && sigma_diff) {
      for (std::size_t i = 0; i < j; ++i) {
        drift += mu_drift[j - i] * drift_terms[i];
        diffusion += sigma_diff[j - i] * noise_terms[i];
      }
    } else {
      for (std::size_t i = 0; i < j; ++i) {
        drift += drift_weight(k_mu, grid, cfg, i, j) * drift_terms[i];
        diffusion += diffusion_weight(k_sigma, grid, cfg, i, j) * noise_terms[i];
      }
    }
    path.values[j] = (x0.x0(grid.point(j)) + drift) + diffusion;
    if (cfg.store_aux) {
      path.aux_y[j] = path.aux_y[j - 1] + noise_terms[j - 1];
      path.aux_z[j] = path.aux_z[j - 1] + dt * drift_terms[j - 1];
    }
    if (!std::isfinite(path.values[j])) fail(j);
    if (j < n) freeze(j);
  }
  return path;
}

}  // namespace detail

PathSample simulate_path(const KernelSpec& k_mu, const KernelSpec& k_sigma, const CoefficientPair& c,
                         const InitialCondition& x0, std::span<const double> increments, std::uint64_t seed,
                         const DyadicGrid& grid, const SchemeConfig& cfg) {
  const auto tables = detail::prepare_route(k_mu, k_sigma, grid, cfg);
  return detail::run_scheme(k_mu, k_sigma, c, x0, increments, seed, grid, cfg, tables);
}

PathSample simulate_path(const KernelSpec& k_mu, const KernelSpec& k_sigma, const CoefficientPair& c,
                         const InitialCondition& x0, const BrownianDriver& driver, const DyadicGrid& grid,
                         const SchemeConfig& cfg) {
  const std::vector<double> increments = restrict_increments(driver, grid);
  return simulate_path(k_mu, k_sigma, c, x0, increments, driver.seed, grid, cfg);
}

void write_path_csv(std::ostream& out, const PathSample& path) {
  const bool aux = path.has_aux();
  out << (aux ? "t,x,y,z\n" : "t,x\n");
  out << std::setprecision(17);
  for (std::size_t j = 0; j < path.values.size(); ++j) {
    out << path.grid.point(j) << ',' << path.values[j];
    if (aux) out << ',' << path.aux_y[j] << ',' << path.aux_z[j];
    out << '\n';
  }
}

}  // namespace sve
