#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sve {

/// Uniform grid with base * 2^level steps on [0, T].
class DyadicGrid {
 public:
  DyadicGrid(double T, unsigned level, unsigned base = 1);

  double horizon() const noexcept { return T_; }
  unsigned level() const noexcept { return level_; }
  unsigned base() const noexcept { return base_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return dt_; }

  /// t_i = T * (i / n_steps); exact at 0 and T.
  double point(std::size_t i) const noexcept {
    return T_ * (static_cast<double>(i) / static_cast<double>(n_steps_));
  }

  /// True if every point of `coarse` is a point of this grid.
  bool refines(const DyadicGrid& coarse) const noexcept;

  bool operator==(const DyadicGrid&) const = default;

 private:
  double T_;
  unsigned level_;
  unsigned base_;
  std::size_t n_steps_;
  double dt_;
};

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter counter, Key key) noexcept;
};

/// Standard normal draw number `index` of stream `seed`, independent of draw order.
double standard_normal(std::uint64_t seed, std::uint64_t index) noexcept;

/// Brownian increments on the finest grid; coarser grids are derived by exact summation.
struct BrownianDriver {
  std::uint64_t seed = 0;
  DyadicGrid finest{1.0, 0};
  std::vector<double> increments;
};

BrownianDriver sample_driver(std::uint64_t seed, const DyadicGrid& finest);

/// Increments of `d` aggregated to the coarse grid. Each coarse increment is
/// the pairwise (dyadic tree) sum of its fine increments, which makes
/// restriction transitive bit-for-bit.
std::vector<double> restrict_increments(const BrownianDriver& d, const DyadicGrid& coarse);

/// Pairwise dyadic sum of a block whose length is base * 2^k.
double dyadic_sum(std::span<const double> values, unsigned base = 1);

/// Binary dump: "SVEB", u32 version, u64 seed, u32 level, u32 base, f64 T,
/// then n_steps little-endian f64 increments.
void write_driver(std::ostream& out, const BrownianDriver& d);
BrownianDriver read_driver(std::istream& in);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against Normal(0, variance).
KsResult ks_test_normal(std::span<const double> sample, double variance);

}  // namespace sve
