#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "sve/coeff.hpp"
#include "sve/error.hpp"
#include "sve/kernel.hpp"
#include "sve/noise.hpp"

namespace sve {

/// How the sub-interval kernel integral is turned into a weight.
enum class KernelQuadrature { left_point, averaged };

/// Which code path produces the weights: tabulated by lag (convolution
/// kernels only) or evaluated per (i, j). `automatic` tabulates when both
/// kernels are of convolution type.
enum class WeightRoute { automatic, generic, tabulated };

std::string_view to_string(KernelQuadrature q) noexcept;
KernelQuadrature parse_kernel_quadrature(std::string_view name);
std::string_view to_string(WeightRoute r) noexcept;
WeightRoute parse_weight_route(std::string_view name);

struct SchemeConfig {
  KernelQuadrature kernel_quadrature = KernelQuadrature::left_point;
  int quadrature_nodes = 4;
  bool store_aux = false;
  WeightRoute weight_route = WeightRoute::automatic;

  bool operator==(const SchemeConfig&) const = default;
};

struct PathSample {
  DyadicGrid grid{1.0, 0};
  std::vector<double> values;  // X(t_j), j = 0..n_steps
  std::vector<double> aux_y;   // sum_{i<j} sigma(t_i, X_i) dB_i   (store_aux only)
  std::vector<double> aux_z;   // sum_{i<j} mu(t_i, X_i) dt        (store_aux only)
  std::uint64_t driver_seed = 0;

  bool has_aux() const noexcept { return !aux_y.empty() && !aux_z.empty(); }
};

/// Raised when the scheme produces a non-finite value. Carries the path up
/// to (and including) the offending step.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, std::size_t step, PathSample partial,
                 std::optional<std::size_t> path_index = std::nullopt)
      : Error(ErrorKind::non_finite, what), step_(step), partial_(std::move(partial)), path_index_(path_index) {}

  std::size_t step() const noexcept { return step_; }
  const PathSample& partial() const noexcept { return partial_; }
  std::optional<std::size_t> path_index() const noexcept { return path_index_; }

 private:
  std::size_t step_;
  PathSample partial_;
  std::optional<std::size_t> path_index_;
};

/// Drift weight W^mu_{i,j} and diffusion weight W^sigma_{i,j} of one kernel.
double drift_weight(const KernelSpec& k, const DyadicGrid& grid, const SchemeConfig& cfg, std::size_t i,
                    std::size_t j);
double diffusion_weight(const KernelSpec& k, const DyadicGrid& grid, const SchemeConfig& cfg, std::size_t i,
                        std::size_t j);

/// Lag-indexed weights of a convolution kernel; entry [lag] for lag = 1..n_steps
/// (entry 0 is unused because the scheme only couples i < j).
struct LagWeights {
  std::vector<double> drift;
  std::vector<double> diffusion;
};

LagWeights convolution_fast_weights(const KernelSpec& k, const DyadicGrid& grid, const SchemeConfig& cfg);

/// The frozen-state Euler scheme on `grid`, driven by `driver` restricted to it.
PathSample simulate_path(const KernelSpec& k_mu, const KernelSpec& k_sigma, const CoefficientPair& c,
                         const InitialCondition& x0, const BrownianDriver& driver, const DyadicGrid& grid,
                         const SchemeConfig& cfg);

/// Same, from increments already aggregated to `grid`.
PathSample simulate_path(const KernelSpec& k_mu, const KernelSpec& k_sigma, const CoefficientPair& c,
                         const InitialCondition& x0, std::span<const double> increments, std::uint64_t seed,
                         const DyadicGrid& grid, const SchemeConfig& cfg);

/// CSV with header `t,x[,y,z]`, 17 significant digits.
void write_path_csv(std::ostream& out, const PathSample& path);

// ---------------------------------------------------------------------------
// Ensembles

/// Running count, mean and central moment sums up to order 8, updated with
/// the pairwise-update formulas so a single pass stays numerically stable.
class MomentAccumulator {
 public:
  static constexpr int kMaxOrder = 8;

  void add(double x) noexcept;
  void merge(const MomentAccumulator& other) noexcept;

  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// (1/n) sum (x - mean)^order for 2 <= order <= 8.
  double central_moment(int order) const noexcept;
  /// Unbiased sample variance.
  double variance() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  std::array<double, kMaxOrder + 1> m_{};  // m_[p] = sum (x - mean)^p
};

struct EnsembleSpec {
  KernelSpec k_mu;
  KernelSpec k_sigma;
  CoefficientPair coeffs;
  InitialCondition x0;
  DyadicGrid grid{1.0, 0};
  SchemeConfig scheme;
  std::uint64_t base_seed = 0;
  std::size_t n_paths = 1;
  /// Drivers are sampled at this level and restricted to `grid`; defaults to the grid level.
  std::optional<unsigned> driver_level;
};

struct RunOptions {
  unsigned workers = 1;
  std::size_t chunk = 64;
};

using PathVisitor = std::function<void(std::size_t index, const PathSample&)>;

/// Anything that can stream paths on a common grid in index order.
class PathSource {
 public:
  virtual ~PathSource() = default;
  virtual const DyadicGrid& grid() const = 0;
  virtual std::size_t size() const = 0;
  virtual void for_each(const PathVisitor& visit) const = 0;
};

/// In-memory paths (synthetic ensembles, precomputed runs).
class VectorPathSource final : public PathSource {
 public:
  VectorPathSource(DyadicGrid grid, std::vector<PathSample> paths);
  const DyadicGrid& grid() const override { return grid_; }
  std::size_t size() const override { return paths_.size(); }
  void for_each(const PathVisitor& visit) const override;

 private:
  DyadicGrid grid_;
  std::vector<PathSample> paths_;
};

struct EnsembleSummary {
  DyadicGrid grid{1.0, 0};
  std::size_t n_paths = 0;
  std::vector<MomentAccumulator> per_time;
};

/// Path p uses seed base_seed + p. Paths are simulated in parallel chunks and
/// handed to visitors strictly in index order, so every result is
/// independent of the worker count.
class Ensemble final : public PathSource {
 public:
  Ensemble(EnsembleSpec spec, RunOptions options = {});

  const DyadicGrid& grid() const override { return spec_.grid; }
  std::size_t size() const override { return spec_.n_paths; }
  void for_each(const PathVisitor& visit) const override;

  PathSample path(std::size_t index) const;
  EnsembleSummary summarize(const PathVisitor& also_visit = {}) const;

  const EnsembleSpec& spec() const noexcept { return spec_; }
  const RunOptions& options() const noexcept { return options_; }

 private:
  EnsembleSpec spec_;
  RunOptions options_;
  DyadicGrid driver_grid_;
  std::optional<LagWeights> mu_table_;
  std::optional<LagWeights> sigma_table_;
};

/// Runs `task(i)` for i in [0, n) on up to `workers` threads and rethrows the
/// exception of the lowest failing index.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace sve
