#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "scheme_detail.hpp"
#include "sve/scheme.hpp"

namespace sve {

namespace {

double binomial(int n, int k) noexcept {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

void MomentAccumulator::add(double x) noexcept {
  MomentAccumulator single;
  single.n_ = 1;
  single.mean_ = x;
  merge(single);
}

void MomentAccumulator::merge(const MomentAccumulator& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  const auto& a = m_;
  const auto& b = other.m_;
  std::array<double, kMaxOrder + 1> out{};
  for (int p = 2; p <= kMaxOrder; ++p) {
    double s = a[p] + b[p];
    for (int k = 1; k <= p - 2; ++k) {
      s += binomial(p, k) * std::pow(delta, k) *
           (std::pow(-nb / n, k) * a[p - k] + std::pow(na / n, k) * b[p - k]);
    }
    s += std::pow(na * nb * delta / n, p) * (1.0 / std::pow(nb, p - 1) - std::pow(-1.0 / na, p - 1));
    out[p] = s;
  }
  m_ = out;
  mean_ += delta * nb / n;
  n_ += other.n_;
}

double MomentAccumulator::central_moment(int order) const noexcept {
  if (n_ == 0 || order < 2 || order > kMaxOrder) return std::nan("");
  return m_[order] / static_cast<double>(n_);
}

double MomentAccumulator::variance() const noexcept {
  if (n_ < 2) return std::nan("");
  return m_[2] / static_cast<double>(n_ - 1);
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------

VectorPathSource::VectorPathSource(DyadicGrid grid, std::vector<PathSample> paths)
    : grid_(grid), paths_(std::move(paths)) {
  for (const auto& p : paths_) {
    if (!(p.grid == grid_) || p.values.size() != grid_.n_steps() + 1) {
      throw Error(ErrorKind::incompatible_grid, "path does not live on the source grid");
    }
  }
}

void VectorPathSource::for_each(const PathVisitor& visit) const {
  for (std::size_t i = 0; i < paths_.size(); ++i) visit(i, paths_[i]);
}

// ---------------------------------------------------------------------------

namespace {

DyadicGrid make_driver_grid(const EnsembleSpec& spec) {
  const unsigned level = spec.driver_level.value_or(spec.grid.level());
  if (level < spec.grid.level()) {
    throw Error(ErrorKind::incompatible_grid, "driver_level is coarser than the simulation grid");
  }
  return DyadicGrid(spec.grid.horizon(), level, spec.grid.base());
}

}  // namespace

Ensemble::Ensemble(EnsembleSpec spec, RunOptions options)
    : spec_(std::move(spec)), options_(options), driver_grid_(make_driver_grid(spec_)) {
  if (spec_.n_paths == 0) throw Error(ErrorKind::invalid_parameter, "n_paths must be positive");
  if (options_.chunk == 0) options_.chunk = 1;
  auto tables = detail::prepare_route(spec_.k_mu, spec_.k_sigma, spec_.grid, spec_.scheme);
  mu_table_ = std::move(tables.mu);
  sigma_table_ = std::move(tables.sigma);
}

PathSample Ensemble::path(std::size_t index) const {
  if (index >= spec_.n_paths) throw Error(ErrorKind::invalid_parameter, "path index out of range");
  const std::uint64_t seed = spec_.base_seed + index;
  const BrownianDriver driver = sample_driver(seed, driver_grid_);
  detail::RouteTables tables{mu_table_, sigma_table_};
  try {
    if (driver_grid_ == spec_.grid) {
      return detail::run_scheme(spec_.k_mu, spec_.k_sigma, spec_.coeffs, spec_.x0, driver.increments, seed,
                                spec_.grid, spec_.scheme, tables);
    }
    const auto increments = restrict_increments(driver, spec_.grid);
    return detail::run_scheme(spec_.k_mu, spec_.k_sigma, spec_.coeffs, spec_.x0, increments, seed, spec_.grid,
                              spec_.scheme, tables);
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(std::string(e.what()) + " in path " + std::to_string(index), e.step(), e.partial(), index);
  }
}

void Ensemble::for_each(const PathVisitor& visit) const {
  const std::size_t chunk = options_.chunk;
  std::vector<PathSample> buffer;
  for (std::size_t start = 0; start < spec_.n_paths; start += chunk) {
    const std::size_t count = std::min(chunk, spec_.n_paths - start);
    buffer.assign(count, PathSample{});
    parallel_for(count, options_.workers, [&](std::size_t k) { buffer[k] = path(start + k); });
    for (std::size_t k = 0; k < count; ++k) visit(start + k, buffer[k]);
  }
}

EnsembleSummary Ensemble::summarize(const PathVisitor& also_visit) const {
  EnsembleSummary s;
  s.grid = spec_.grid;
  s.n_paths = spec_.n_paths;
  s.per_time.resize(spec_.grid.n_steps() + 1);
  for_each([&](std::size_t index, const PathSample& p) {
    for (std::size_t j = 0; j < p.values.size(); ++j) s.per_time[j].add(p.values[j]);
    if (also_visit) also_visit(index, p);
  });
  return s;
}

}  // namespace sve
