#include "sve/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sve/error.hpp"

namespace sve {

DyadicGrid::DyadicGrid(double T, unsigned level, unsigned base) : T_(T), level_(level), base_(base) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::invalid_parameter, "grid horizon T must be positive");
  if (base == 0) throw Error(ErrorKind::invalid_parameter, "grid base must be positive");
  if (level > 40) throw Error(ErrorKind::invalid_parameter, "grid level too large");
  n_steps_ = static_cast<std::size_t>(base) << level;
  dt_ = T / static_cast<double>(n_steps_);
}

bool DyadicGrid::refines(const DyadicGrid& coarse) const noexcept {
  return coarse.T_ == T_ && coarse.base_ == base_ && coarse.level_ <= level_;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Uniform in (0, 1) from 53 random bits; never 0, never 1.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

double standard_normal(std::uint64_t seed, std::uint64_t index) noexcept {
  const Philox4x32::Counter counter{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u,
                                    0u};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(counter, key);
  const double u1 = open_unit(r[0], r[1]);
  const double u2 = open_unit(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianDriver sample_driver(std::uint64_t seed, const DyadicGrid& finest) {
  BrownianDriver d;
  d.seed = seed;
  d.finest = finest;
  d.increments.resize(finest.n_steps());
  const double scale = std::sqrt(finest.dt());
  for (std::size_t i = 0; i < d.increments.size(); ++i) {
    d.increments[i] = scale * standard_normal(seed, i);
  }
  return d;
}

double dyadic_sum(std::span<const double> values, unsigned base) {
  auto tree = [](auto&& self, std::span<const double> v) -> double {
    if (v.size() == 1) return v[0];
    const std::size_t half = v.size() / 2;
    return self(self, v.first(half)) + self(self, v.subspan(half));
  };
  if (values.empty()) return 0.0;
  if (base == 0 || values.size() % base != 0) {
    throw Error(ErrorKind::incompatible_grid, "dyadic_sum: length is not a multiple of the base");
  }
  const std::size_t block = values.size() / base;
  if (!std::has_single_bit(block)) {
    throw Error(ErrorKind::incompatible_grid, "dyadic_sum: block length is not a power of two");
  }
  double total = 0.0;
  for (unsigned b = 0; b < base; ++b) total += tree(tree, values.subspan(b * block, block));
  return total;
}

std::vector<double> restrict_increments(const BrownianDriver& d, const DyadicGrid& coarse) {
  if (!d.finest.refines(coarse)) {
    std::ostringstream os;
    os << "grid (T=" << coarse.horizon() << ", level=" << coarse.level() << ", base=" << coarse.base()
       << ") is not a sub-grid of the driver grid (T=" << d.finest.horizon() << ", level=" << d.finest.level()
       << ", base=" << d.finest.base() << ")";
    throw Error(ErrorKind::incompatible_grid, os.str());
  }
  if (coarse.level() == d.finest.level()) return d.increments;
  const std::size_t ratio = std::size_t{1} << (d.finest.level() - coarse.level());
  std::vector<double> out(coarse.n_steps());
  const std::span<const double> fine(d.increments);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = dyadic_sum(fine.subspan(j * ratio, ratio));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'V', 'E', 'B'};
constexpr std::uint32_t kDumpVersion = 1;

template <class U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(U));
  if (!in) throw Error(ErrorKind::io, "truncated driver dump");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_driver(std::ostream& out, const BrownianDriver& d) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kDumpVersion);
  put_le<std::uint64_t>(out, d.seed);
  put_le<std::uint32_t>(out, d.finest.level());
  put_le<std::uint32_t>(out, d.finest.base());
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(d.finest.horizon()));
  for (double v : d.increments) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error(ErrorKind::io, "failed writing driver dump");
}

BrownianDriver read_driver(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::io, "not a driver dump (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kDumpVersion) throw Error(ErrorKind::io, "unsupported driver dump version");
  BrownianDriver d;
  d.seed = get_le<std::uint64_t>(in);
  const auto level = get_le<std::uint32_t>(in);
  const auto base = get_le<std::uint32_t>(in);
  const double T = std::bit_cast<double>(get_le<std::uint64_t>(in));
  d.finest = DyadicGrid(T, level, base);
  d.increments.resize(d.finest.n_steps());
  for (double& v : d.increments) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return d;
}

KsResult ks_test_normal(std::span<const double> sample, double variance) {
  if (sample.empty() || !(variance > 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "KS test needs a nonempty sample and positive variance");
  }
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-x[i] / (sd * std::numbers::sqrt2));
    d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  // Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
  double q = 0.0;
  if (lambda < 0.2) {
    q = 1.0;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
      q += term;
      if (std::abs(term) < 1e-16) break;
      sign = -sign;
    }
    q = std::clamp(2.0 * q, 0.0, 1.0);
  }
  return {d, q};
}

}  // namespace sve
