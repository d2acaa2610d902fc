#include "sve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "numeric.hpp"
#include "scheme_detail.hpp"

namespace sve {

namespace {

// |x|^q with repeated multiplication for integer orders, so the common cases
// stay exact and cheap.
double abs_pow(double x, double q) noexcept {
  const double a = std::abs(x);
  if (q == 2.0) return a * a;
  if (q == 4.0) {
    const double s = a * a;
    return s * s;
  }
  if (q == 1.0) return a;
  return std::pow(a, q);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double fit_log2_rate(std::span<const unsigned> levels, std::span<const double> gaps) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    if (gaps[k] > 0.0 && std::isfinite(gaps[k])) {
      x.push_back(static_cast<double>(levels[k]));
      y.push_back(std::log2(gaps[k]));
    }
  }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return numeric::least_squares(x, y).slope;
}

void check_levels(std::span<const unsigned> levels, std::size_t min_count) {
  if (levels.size() < min_count) {
    throw Error(ErrorKind::invalid_parameter, "at least " + std::to_string(min_count) + " levels are required");
  }
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (levels[k] < levels[k - 1]) throw Error(ErrorKind::invalid_parameter, "levels must be nondecreasing");
  }
}

using PathSeries = std::vector<std::vector<double>>;

// Samples one driver per path at `driver_level`, computes per-path series in
// parallel chunks and hands them to `consume` in path order.
template <class Compute, class Consume>
void sweep_paths(const CoupledProblem& pb, unsigned driver_level, const RunOptions& opt, Compute&& compute,
                 Consume&& consume) {
  if (pb.n_paths == 0) throw Error(ErrorKind::invalid_parameter, "n_paths must be positive");
  const DyadicGrid driver_grid(pb.T, driver_level, pb.base);
  const std::size_t chunk = std::max<std::size_t>(1, opt.chunk);
  std::vector<PathSeries> buffer;
  for (std::size_t start = 0; start < pb.n_paths; start += chunk) {
    const std::size_t count = std::min(chunk, pb.n_paths - start);
    buffer.assign(count, PathSeries{});
    parallel_for(count, opt.workers, [&](std::size_t k) {
      const std::size_t p = start + k;
      const BrownianDriver driver = sample_driver(pb.base_seed + p, driver_grid);
      buffer[k] = compute(p, driver);
    });
    for (std::size_t k = 0; k < count; ++k) consume(start + k, buffer[k]);
  }
}

// Runs the scheme at one level with the driver restricted to it, adding the
// level and path to any error.
PathSample simulate_level(const CoupledProblem& pb, const BrownianDriver& driver, const DyadicGrid& grid,
                          const SchemeConfig& cfg, const detail::RouteTables& tables, std::size_t path_index) {
  auto context = [&] {
    return " (level " + std::to_string(grid.level()) + ", path " + std::to_string(path_index) + ")";
  };
  try {
    const auto increments = restrict_increments(driver, grid);
    return detail::run_scheme(pb.k_mu, pb.k_sigma, pb.coeffs, pb.x0, increments, driver.seed, grid, cfg, tables);
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(e.what() + context(), e.step(), e.partial(), path_index);
  } catch (const Error& e) {
    throw Error(e.kind(), e.what() + context());
  }
}

struct SupOfMean {
  double value = 0.0;
  std::size_t index = 0;
};

SupOfMean sup_of_mean(const std::vector<double>& sums, std::size_t n_paths) {
  SupOfMean s;
  for (std::size_t j = 0; j < sums.size(); ++j) {
    const double m = sums[j] / static_cast<double>(n_paths);
    if (j == 0 || m > s.value) {
      s.value = m;
      s.index = j;
    }
  }
  return s;
}

void add_into(std::vector<double>& acc, const std::vector<double>& v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t j = 0; j < v.size(); ++j) acc[j] += v[j];
}

}  // namespace

// ---------------------------------------------------------------------------

MomentReport estimate_moments(const PathSource& paths, std::span<const double> q_list, bool keep_curves) {
  if (q_list.empty()) throw Error(ErrorKind::invalid_parameter, "q_list is empty");
  for (double q : q_list) {
    if (!(q >= 1.0 && q <= 8.0)) throw Error(ErrorKind::invalid_parameter, "moment order q must lie in [1, 8]");
  }
  const std::size_t n = paths.size();
  if (n < 2 * kJackknifeBlocks) {
    throw Error(ErrorKind::insufficient_paths, "moment estimation needs at least " +
                                                   std::to_string(2 * kJackknifeBlocks) + " paths, got " +
                                                   std::to_string(n));
  }
  const DyadicGrid grid = paths.grid();
  const std::size_t points = grid.n_steps() + 1;
  const std::size_t nq = q_list.size();

  // block_sums[b][qi * points + j]
  std::vector<std::vector<double>> block_sums(kJackknifeBlocks, std::vector<double>(nq * points, 0.0));
  std::vector<std::size_t> block_count(kJackknifeBlocks, 0);
  paths.for_each([&](std::size_t p, const PathSample& path) {
    const std::size_t b = p * kJackknifeBlocks / n;
    ++block_count[b];
    auto& sums = block_sums[b];
    for (std::size_t qi = 0; qi < nq; ++qi) {
      double* row = sums.data() + qi * points;
      for (std::size_t j = 0; j < points; ++j) row[j] += abs_pow(path.values[j], q_list[qi]);
    }
  });

  std::vector<double> total(nq * points, 0.0);
  for (const auto& sums : block_sums) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += sums[k];
  }

  MomentReport r;
  r.q_list.assign(q_list.begin(), q_list.end());
  r.grid = grid;
  r.n_paths = n;
  const double nd = static_cast<double>(n);
  for (std::size_t qi = 0; qi < nq; ++qi) {
    const double* row = total.data() + qi * points;
    double sup = 0.0;
    std::size_t arg = 0;
    std::vector<double> curve(points);
    for (std::size_t j = 0; j < points; ++j) {
      curve[j] = row[j] / nd;
      if (j == 0 || curve[j] > sup) {
        sup = curve[j];
        arg = j;
      }
    }
    std::vector<double> loo(kJackknifeBlocks);
    for (std::size_t b = 0; b < kJackknifeBlocks; ++b) {
      const double* brow = block_sums[b].data() + qi * points;
      const double rest = nd - static_cast<double>(block_count[b]);
      double s = 0.0;
      for (std::size_t j = 0; j < points; ++j) s = std::max(s, (row[j] - brow[j]) / rest);
      loo[b] = s;
    }
    double mean_loo = 0.0;
    for (double v : loo) mean_loo += v;
    mean_loo /= static_cast<double>(kJackknifeBlocks);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
    const double B = static_cast<double>(kJackknifeBlocks);
    r.sup_moment.push_back(sup);
    r.argmax.push_back(arg);
    r.mc_stderr.push_back(std::sqrt((B - 1.0) / B * ss));
    if (keep_curves) r.per_time.push_back(std::move(curve));
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> admissible_lags(const DyadicGrid& grid, std::span<const double> lags,
                                    const HolderOptions& options) {
  std::vector<double> kept;
  for (double h : lags) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::invalid_parameter, "lags must be positive");
    const double steps = h / grid.dt();
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
      std::ostringstream os;
      os << "lag " << h << " is not a multiple of the grid step " << grid.dt();
      throw Error(ErrorKind::invalid_parameter, os.str());
    }
    const double rounded = std::round(steps);
    if (rounded < options.min_lag_steps) continue;
    if (h > options.max_lag_fraction * grid.horizon() * (1.0 + 1e-12)) continue;
    kept.push_back(rounded * grid.dt());
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.size() < 4) {
    throw Error(ErrorKind::invalid_parameter,
                "Hölder fit needs at least 4 distinct admissible lags, got " + std::to_string(kept.size()));
  }
  if (kept.back() < 4.0 * kept.front() * (1.0 - 1e-12)) {
    throw Error(ErrorKind::invalid_parameter, "admissible lags must span at least 2 octaves");
  }
  return kept;
}

HolderEstimate estimate_holder_exponent(const PathSource& paths, double p, std::span<const double> lags,
                                        const HolderOptions& options) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw Error(ErrorKind::invalid_parameter, "Hölder fit needs p >= 2");
  const DyadicGrid grid = paths.grid();
  HolderEstimate est;
  est.p = p;
  est.lags = admissible_lags(grid, lags, options);
  for (double h : lags) {
    if (std::find_if(est.lags.begin(), est.lags.end(), [&](double k) { return std::abs(k - h) <= 1e-9 * h; }) ==
        est.lags.end()) {
      est.dropped.push_back(h);
    }
  }
  const std::size_t n = grid.n_steps();
  std::vector<std::size_t> steps;
  for (double h : est.lags) steps.push_back(static_cast<std::size_t>(std::llround(h / grid.dt())));

  std::vector<double> sums(steps.size(), 0.0);
  paths.for_each([&](std::size_t, const PathSample& path) {
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const std::size_t s = steps[k];
      double acc = 0.0;
      for (std::size_t j = 0; j + s <= n; ++j) acc += abs_pow(path.values[j + s] - path.values[j], p);
      sums[k] += acc;
    }
  });
  est.n_paths = paths.size();

  std::vector<double> log_h;
  std::vector<double> log_d;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const double windows = static_cast<double>(n - steps[k] + 1);
    const double d = sums[k] / (windows * static_cast<double>(paths.size()));
    est.d_values.push_back(d);
    if (!(d > 0.0) || !std::isfinite(d)) {
      std::ostringstream os;
      os << "degenerate Hölder fit: D(h) = " << d << " at lag " << est.lags[k];
      throw Error(ErrorKind::degenerate, os.str());
    }
    log_h.push_back(std::log(est.lags[k]));
    log_d.push_back(std::log(d));
  }
  const auto fit = numeric::least_squares(log_h, log_d);
  est.beta_hat = fit.slope / p;
  est.r_squared = fit.r_squared;
  est.intercept = fit.intercept;
  return est;
}

// ---------------------------------------------------------------------------

ConvergenceReport measure_cauchy_gaps(const CoupledProblem& pb, std::span<const unsigned> levels,
                                      const SchemeConfig& cfg, const RunOptions& options) {
  check_levels(levels, 2);
  const unsigned top = levels.back();
  std::vector<DyadicGrid> grids;
  std::vector<detail::RouteTables> tables;
  for (unsigned l : levels) {
    grids.emplace_back(pb.T, l, pb.base);
    tables.push_back(detail::prepare_route(pb.k_mu, pb.k_sigma, grids.back(), cfg));
  }
  const std::size_t pairs = levels.size() - 1;
  std::vector<std::vector<double>> sums(pairs);

  sweep_paths(
      pb, top, options,
      [&](std::size_t p, const BrownianDriver& driver) {
        std::vector<PathSample> xs;
        for (std::size_t k = 0; k < levels.size(); ++k) {
          xs.push_back(simulate_level(pb, driver, grids[k], cfg, tables[k], p));
        }
        PathSeries diffs(pairs);
        for (std::size_t k = 0; k < pairs; ++k) {
          const std::size_t stride = std::size_t{1} << (levels[k + 1] - levels[k]);
          const auto& coarse = xs[k].values;
          const auto& fine = xs[k + 1].values;
          diffs[k].resize(coarse.size());
          for (std::size_t j = 0; j < coarse.size(); ++j) diffs[k][j] = std::abs(fine[j * stride] - coarse[j]);
        }
        return diffs;
      },
      [&](std::size_t, const PathSeries& diffs) {
        for (std::size_t k = 0; k < pairs; ++k) add_into(sums[k], diffs[k]);
      });

  ConvergenceReport r;
  r.levels.assign(levels.begin(), levels.end());
  r.n_paths = pb.n_paths;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto s = sup_of_mean(sums[k], pb.n_paths);
    r.gap_levels.push_back(levels[k]);
    r.gaps.push_back(s.value);
    r.gap_witness.push_back(s.index);
  }
  r.fitted_rate = fit_log2_rate(r.gap_levels, r.gaps);
  return r;
}

ConvergenceReport uniqueness_coupling_test(const CoupledProblem& pb, std::span<const unsigned> levels,
                                           const SchemeConfig& cfg_a, const SchemeConfig& cfg_b,
                                           const RunOptions& options) {
  if (cfg_a == cfg_b) {
    throw Error(ErrorKind::identical_config, "the two scheme configurations are identical");
  }
  check_levels(levels, 1);
  const unsigned top = levels.back();
  std::vector<DyadicGrid> grids;
  std::vector<detail::RouteTables> tables_a;
  std::vector<detail::RouteTables> tables_b;
  for (unsigned l : levels) {
    grids.emplace_back(pb.T, l, pb.base);
    tables_a.push_back(detail::prepare_route(pb.k_mu, pb.k_sigma, grids.back(), cfg_a));
    tables_b.push_back(detail::prepare_route(pb.k_mu, pb.k_sigma, grids.back(), cfg_b));
  }
  std::vector<std::vector<double>> sums(levels.size());

  sweep_paths(
      pb, top, options,
      [&](std::size_t p, const BrownianDriver& driver) {
        PathSeries diffs(levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) {
          const auto xa = simulate_level(pb, driver, grids[k], cfg_a, tables_a[k], p);
          const auto xb = simulate_level(pb, driver, grids[k], cfg_b, tables_b[k], p);
          diffs[k].resize(xa.values.size());
          for (std::size_t j = 0; j < xa.values.size(); ++j) diffs[k][j] = std::abs(xa.values[j] - xb.values[j]);
        }
        return diffs;
      },
      [&](std::size_t, const PathSeries& diffs) {
        for (std::size_t k = 0; k < levels.size(); ++k) add_into(sums[k], diffs[k]);
      });

  ConvergenceReport r;
  r.levels.assign(levels.begin(), levels.end());
  r.gap_levels = r.levels;
  r.n_paths = pb.n_paths;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto s = sup_of_mean(sums[k], pb.n_paths);
    r.gaps.push_back(s.value);
    r.gap_witness.push_back(s.index);
  }
  r.fitted_rate = fit_log2_rate(r.gap_levels, r.gaps);
  bool decreasing = true;
  for (std::size_t k = 1; k < r.gaps.size(); ++k) {
    const bool both_zero = r.gaps[k] == 0.0 && r.gaps[k - 1] == 0.0;
    if (!(r.gaps[k] < r.gaps[k - 1]) && !both_zero) decreasing = false;
  }
  r.verdict = decreasing ? kVerdictConsistent : kVerdictViolation;
  return r;
}

// ---------------------------------------------------------------------------

DecompositionReport reconstruct_semimartingale(const PathSample& path, const KernelSpec& k_mu,
                                               const KernelSpec& k_sigma, const InitialCondition& x0,
                                               bool keep_curves) {
  if (!path.has_aux()) throw Error(ErrorKind::missing_aux, "path was simulated without store_aux");
  if (!k_mu.d2) throw Error(ErrorKind::missing_derivative, "kernel " + k_mu.name + " has no d/dt derivative");
  if (!k_sigma.d2) {
    throw Error(ErrorKind::missing_derivative, "kernel " + k_sigma.name + " has no d/dt derivative");
  }
  const DyadicGrid& grid = path.grid;
  const std::size_t n = grid.n_steps();
  const double dt = grid.dt();

  std::vector<double> dz(n);
  std::vector<double> dy(n);
  for (std::size_t i = 0; i < n; ++i) {
    dz[i] = path.aux_z[i + 1] - path.aux_z[i];
    dy[i] = path.aux_y[i + 1] - path.aux_y[i];
  }

  DecompositionReport r;
  if (keep_curves) {
    r.martingale.assign(n + 1, 0.0);
    r.drift.assign(n + 1, 0.0);
  }
  double m = 0.0;
  double diag_drift = 0.0;
  double outer = 0.0;
  r.residual_sup = std::abs(path.values[0] - x0.x0(0.0));
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t k = j - 1;
    const double tk = grid.point(k);
    double inner = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double ti = grid.point(i);
      inner += k_mu.d2(ti, tk) * dz[i] + k_sigma.d2(ti, tk) * dy[i];
    }
    m += k_sigma.eval(tk, tk) * dy[k];
    diag_drift += k_mu.eval(tk, tk) * dz[k];
    outer += dt * inner;
    const double a = diag_drift + outer;
    const double residual = std::abs(path.values[j] - x0.x0(grid.point(j)) - m - a);
    if (!std::isnan(r.residual_sup) && (std::isnan(residual) || residual > r.residual_sup)) {
      r.residual_sup = residual;
      r.witness = j;
    }
    if (keep_curves) {
      r.martingale[j] = m;
      r.drift[j] = a;
    }
  }
  return r;
}

DecompositionStudy decomposition_study(const CoupledProblem& pb, std::span<const unsigned> levels,
                                       const SchemeConfig& cfg, const RunOptions& options) {
  check_levels(levels, 1);
  SchemeConfig with_aux = cfg;
  with_aux.store_aux = true;
  std::vector<DyadicGrid> grids;
  std::vector<detail::RouteTables> tables;
  for (unsigned l : levels) {
    grids.emplace_back(pb.T, l, pb.base);
    tables.push_back(detail::prepare_route(pb.k_mu, pb.k_sigma, grids.back(), with_aux));
  }
  std::vector<std::vector<double>> residuals(levels.size());

  sweep_paths(
      pb, levels.back(), options,
      [&](std::size_t p, const BrownianDriver& driver) {
        PathSeries out(levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) {
          const auto x = simulate_level(pb, driver, grids[k], with_aux, tables[k], p);
          out[k].push_back(reconstruct_semimartingale(x, pb.k_mu, pb.k_sigma, pb.x0).residual_sup);
        }
        return out;
      },
      [&](std::size_t, const PathSeries& out) {
        for (std::size_t k = 0; k < levels.size(); ++k) residuals[k].push_back(out[k][0]);
      });

  DecompositionStudy s;
  s.levels.assign(levels.begin(), levels.end());
  s.n_paths = pb.n_paths;
  for (const auto& r : residuals) {
    s.median_residual.push_back(median(r));
    s.max_residual.push_back(*std::max_element(r.begin(), r.end()));
  }
  return s;
}

}  // namespace sve
