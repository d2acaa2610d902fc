#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sve/error.hpp"
#include "sve/noise.hpp"

using namespace sve;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("standard normals depend only on (seed, index)") {
  CHECK(standard_normal(7, 123) == standard_normal(7, 123));
  CHECK(standard_normal(7, 123) != standard_normal(8, 123));
  CHECK(standard_normal(7, 123) != standard_normal(7, 124));
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(std::isfinite(standard_normal(3, i)));
}

TEST_CASE("grid points are exact at both ends") {
  const DyadicGrid g(0.7, 5, 3);
  CHECK(g.n_steps() == 96);
  CHECK(g.point(0) == 0.0);
  CHECK(g.point(96) == 0.7);
  CHECK(g.refines(DyadicGrid(0.7, 2, 3)));
  CHECK_FALSE(g.refines(DyadicGrid(0.7, 6, 3)));
  CHECK_FALSE(g.refines(DyadicGrid(0.7, 2, 1)));
  CHECK_THROWS_AS(DyadicGrid(0.0, 3), Error);
}

TEST_CASE("increments at the finest level are N(0, dt)") {
  const DyadicGrid g(2.0, 14);
  const auto d = sample_driver(99, g);
  REQUIRE(d.increments.size() == g.n_steps());
  const auto ks = ks_test_normal(d.increments, g.dt());
  CHECK(ks.p_value >= 1e-3);
  // A wrong variance is rejected.
  CHECK(ks_test_normal(d.increments, 4.0 * g.dt()).p_value < 1e-3);
}

TEST_CASE("restricted increments are N(0, coarse dt) and restriction is transitive bit-for-bit") {
  const DyadicGrid fine(1.0, 12);
  const auto d = sample_driver(5, fine);
  const DyadicGrid mid(1.0, 9);
  const DyadicGrid coarse(1.0, 4);
  const auto via_mid = restrict_increments(BrownianDriver{d.seed, mid, restrict_increments(d, mid)}, coarse);
  const auto direct = restrict_increments(d, coarse);
  REQUIRE(via_mid.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) CHECK(via_mid[i] == direct[i]);

  std::vector<double> pooled;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto inc = restrict_increments(sample_driver(seed, DyadicGrid(1.0, 10)), mid);
    pooled.insert(pooled.end(), inc.begin(), inc.end());
  }
  CHECK(ks_test_normal(pooled, mid.dt()).p_value >= 1e-3);
}

TEST_CASE("B(T) agrees exactly across levels") {
  const auto d = sample_driver(11, DyadicGrid(1.0, 10));
  const double total = dyadic_sum(d.increments);
  for (unsigned level = 0; level <= 10; ++level) {
    CHECK(dyadic_sum(restrict_increments(d, DyadicGrid(1.0, level))) == total);
  }
  CHECK(restrict_increments(d, DyadicGrid(1.0, 0)).front() == total);
}

TEST_CASE("restriction to a non-sub-grid is rejected") {
  const auto d = sample_driver(1, DyadicGrid(1.0, 6));
  CHECK_THROWS_WITH_AS(restrict_increments(d, DyadicGrid(1.0, 7)), doctest::Contains("not a sub-grid"), Error);
  CHECK_THROWS_AS(restrict_increments(d, DyadicGrid(2.0, 3)), Error);
  try {
    restrict_increments(d, DyadicGrid(1.0, 3, 3));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::incompatible_grid);
  }
}

TEST_CASE("binary dump round-trips and rejects foreign data") {
  const auto d = sample_driver(42, DyadicGrid(1.5, 7, 3));
  std::stringstream buf;
  write_driver(buf, d);
  CHECK(buf.str().size() == 4 + 4 + 8 + 4 + 4 + 8 + 8 * d.increments.size());
  const auto back = read_driver(buf);
  CHECK(back.seed == d.seed);
  CHECK(back.finest == d.finest);
  CHECK(back.increments == d.increments);

  std::stringstream bad("NOPE and more");
  CHECK_THROWS_AS(read_driver(bad), Error);
  std::string truncated = [&] {
    std::stringstream s;
    write_driver(s, d);
    return s.str().substr(0, 40);
  }();
  std::stringstream cut(truncated);
  CHECK_THROWS_AS(read_driver(cut), Error);
}

TEST_CASE("KS test rejects a shifted sample") {
  std::vector<double> x;
  for (std::uint64_t i = 0; i < 5000; ++i) x.push_back(standard_normal(2, i) + 0.2);
  CHECK(ks_test_normal(x, 1.0).p_value < 1e-3);
  CHECK_THROWS_AS(ks_test_normal({}, 1.0), Error);
}
