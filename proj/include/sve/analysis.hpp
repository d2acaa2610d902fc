#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sve/scheme.hpp"

namespace sve {

struct MomentReport {
  std::vector<double> q_list;
  std::vector<double> sup_moment;  // per q: max over grid points of the mean of |X_t|^q
  std::vector<double> mc_stderr;   // per q: jackknife over path blocks
  std::vector<std::size_t> argmax; // per q: grid index attaining the max
  DyadicGrid grid{1.0, 0};
  std::size_t n_paths = 0;
  std::vector<std::vector<double>> per_time;  // per q, per grid point; empty unless requested
};

inline constexpr std::size_t kJackknifeBlocks = 20;

MomentReport estimate_moments(const PathSource& paths, std::span<const double> q_list, bool keep_curves = false);

struct HolderOptions {
  double min_lag_steps = 4.0;     // shorter lags sit on the discretization floor
  double max_lag_fraction = 0.125; // longer lags (relative to T) have too few windows
};

struct HolderEstimate {
  double p = 2.0;
  std::vector<double> lags;       // lags kept for the fit
  std::vector<double> dropped;    // lags outside the admissible window
  std::vector<double> d_values;   // D(h) per kept lag
  double beta_hat = 0.0;
  double r_squared = 0.0;
  double intercept = 0.0;
  std::size_t n_paths = 0;
};

/// Lags kept by the estimator's window, or an invalid-parameter error naming
/// the unmet precondition.
std::vector<double> admissible_lags(const DyadicGrid& grid, std::span<const double> lags,
                                    const HolderOptions& options = {});

HolderEstimate estimate_holder_exponent(const PathSource& paths, double p, std::span<const double> lags,
                                        const HolderOptions& options = {});

/// The model and sampling shared by the level-coupled studies.
struct CoupledProblem {
  KernelSpec k_mu;
  KernelSpec k_sigma;
  CoefficientPair coeffs;
  InitialCondition x0;
  double T = 1.0;
  unsigned base = 1;
  std::uint64_t base_seed = 0;
  std::size_t n_paths = 1;
};

struct ConvergenceReport {
  std::vector<unsigned> levels;
  std::vector<unsigned> gap_levels;  // level each gap is reported at (the coarser one for Cauchy gaps)
  std::vector<double> gaps;
  std::vector<std::size_t> gap_witness;  // grid index at gap_levels[k] attaining the sup
  double fitted_rate = 0.0;              // slope of log2(gap) vs level over positive gaps; NaN if < 2
  std::size_t n_paths = 0;
  std::string verdict;                   // coupling test only
};

/// Gaps between consecutive levels under one shared driver per path, sampled
/// at the largest level.
ConvergenceReport measure_cauchy_gaps(const CoupledProblem& problem, std::span<const unsigned> levels,
                                      const SchemeConfig& cfg, const RunOptions& options = {});

/// Gap between two discretizations at each level under a shared driver.
/// `cfg_a == cfg_b` is rejected as identical-config.
ConvergenceReport uniqueness_coupling_test(const CoupledProblem& problem, std::span<const unsigned> levels,
                                           const SchemeConfig& cfg_a, const SchemeConfig& cfg_b,
                                           const RunOptions& options = {});

inline constexpr const char* kVerdictConsistent = "consistent with pathwise uniqueness";
inline constexpr const char* kVerdictViolation = "violation candidate";

struct DecompositionReport {
  double residual_sup = 0.0;
  std::size_t witness = 0;
  std::vector<double> martingale;  // M(t_j); empty unless requested
  std::vector<double> drift;       // A(t_j); empty unless requested
};

/// Splits X - x0 into the diagonal-kernel martingale part M and the
/// finite-variation part A built from the time derivatives of the kernels,
/// both discretized from the path's stored running integrals.
DecompositionReport reconstruct_semimartingale(const PathSample& path, const KernelSpec& k_mu,
                                               const KernelSpec& k_sigma, const InitialCondition& x0,
                                               bool keep_curves = false);

struct DecompositionStudy {
  std::vector<unsigned> levels;
  std::vector<double> median_residual;
  std::vector<double> max_residual;
  std::size_t n_paths = 0;
};

/// Median and max residual_sup over the ensemble at each level, drivers shared across levels.
DecompositionStudy decomposition_study(const CoupledProblem& problem, std::span<const unsigned> levels,
                                       const SchemeConfig& cfg, const RunOptions& options = {});

}  // namespace sve
