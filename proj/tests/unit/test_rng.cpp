#include <doctest.h>

#include <cmath>
#include <vector>

#include "logcorr/rng.hpp"
#include "logcorr/stats.hpp"

using logcorr::Philox4x32;
using logcorr::RandomStream;

TEST_CASE("philox known-answer vectors") {
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are addressable and reproducible") {
  RandomStream a(42, 7, 3), b(42, 7, 3), c(42, 8, 3), e(42, 7, 4);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != e.next_u64());
  }
}

TEST_CASE("uniforms stay in the open unit interval") {
  RandomStream s(1, 0, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  RandomStream s(2024, 0, 0);
  std::vector<double> xs(200000);
  s.fill_normal(xs);
  logcorr::RunningStats m, m2;
  for (double x : xs) {
    m.add(x);
    m2.add(x * x);
  }
  CHECK(std::abs(m.mean()) < 4.0 * m.standard_error());
  CHECK(std::abs(m2.mean() - 1.0) < 4.0 * m2.standard_error());
  const double ks = logcorr::ks_statistic(xs, logcorr::standard_normal_cdf);
  CHECK(logcorr::ks_pvalue(ks, xs.size()) > 1e-3);
}
