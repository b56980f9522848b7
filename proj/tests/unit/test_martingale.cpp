#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "logcorr/errors.hpp"
#include "logcorr/martingale.hpp"
#include "logcorr/stats.hpp"

using namespace logcorr;

namespace {

GridSpec grid1(int n, double R = 1.0) {
  GridSpec g;
  g.d = 1;
  g.n = n;
  g.R = R;
  return g;
}

FieldState flat_state(const GridSpec& g, double value, double t) {
  FieldState s;
  s.values.assign(g.size(), value);
  s.t = t;
  return s;
}

}  // namespace

TEST_CASE("cell weights clip to the region") {
  const auto g = grid1(11);
  const auto w = region_weights(g, Box{{0.12, 0.0}, {0.73, 0.0}});
  double total = 0.0;
  for (double v : w) total += v;
  CHECK(total == doctest::Approx(0.61).epsilon(1e-14));
  CHECK(w[0] == 0.0);
  CHECK(w[1] == doctest::Approx(0.03));
  CHECK(w[7] == doctest::Approx(0.08));

  GridSpec g2;
  g2.d = 2;
  g2.n = 9;
  const auto w2 = region_weights(g2, Box{{0.1, 0.2}, {0.6, 0.9}});
  total = 0.0;
  for (double v : w2) total += v;
  CHECK(total == doctest::Approx(0.5 * 0.7).epsilon(1e-14));
}

TEST_CASE("gamma = 0 gives the Lebesgue measure of A") {
  const auto g = grid1(33);
  const Box a{{0.2, 0.0}, {0.9, 0.0}};
  const auto s = flat_state(g, -3.7, 2.0);
  CHECK(additive_measure(s, g, 0.0, a) == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("empty region and region outside the grid") {
  const auto g = grid1(17);
  const auto s = flat_state(g, 0.3, 1.0);
  const Box empty{{0.4, 0.0}, {0.4, 0.0}};
  CHECK(additive_measure(s, g, 1.0, empty) == 0.0);
  CHECK(derivative_measure(s, g, empty) == 0.0);
  CHECK_THROWS_AS(additive_measure(s, g, 1.0, Box{{0.5, 0.0}, {1.5, 0.0}}), ValidationError);
  CHECK_THROWS_AS(derivative_measure(s, g, Box{{-0.1, 0.0}, {0.5, 0.0}}), ValidationError);
}

TEST_CASE("closed form on a constant field") {
  const auto g = grid1(9);
  const double y = -1.3, t = 3.0, gamma = 0.8;
  const auto s = flat_state(g, y, t);
  const Box all{{0.0, 0.0}, {1.0, 0.0}};
  CHECK(additive_measure(s, g, gamma, all) ==
        doctest::Approx(std::exp(gamma * y + gamma * std::sqrt(2.0) * t - 0.5 * gamma * gamma * t)).epsilon(1e-13));
  CHECK(derivative_measure(s, g, all) == doctest::Approx(-y * std::exp(std::sqrt(2.0) * y + t)).epsilon(1e-13));
}

TEST_CASE("log-space accumulation survives a large dynamic range") {
  const auto g = grid1(5);
  FieldState s = flat_state(g, 0.0, 200.0);
  s.values = {-300.0, -290.0, -283.0, -400.0, -500.0};
  const Box all{{0.0, 0.0}, {1.0, 0.0}};
  // Individual terms are near e^{-117}; the total must still be positive and finite.
  const double m = derivative_measure(s, g, all);
  CHECK(m > 0.0);
  CHECK(std::isfinite(m));
  const double expected = 0.25 * 283.0 * std::exp(-283.0 * std::sqrt(2.0) + 200.0);
  CHECK(m == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("enlarging A never decreases M^gamma") {
  const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(65), 0.1);
  const FieldState s = sampler.sample_field(2.0, 5, 0);
  const double small = additive_measure(s, sampler.grid(), 1.0, Box{{0.3, 0.0}, {0.5, 0.0}});
  const double large = additive_measure(s, sampler.grid(), 1.0, Box{{0.2, 0.0}, {0.7, 0.0}});
  CHECK(large >= small);
}

TEST_CASE("trajectory: gamma = 0 constant, mean one for gamma = 1, mean zero for M'") {
  const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(33), 0.1);
  MeasureRequest req;
  req.gammas = {0.0, 1.0};
  req.region = Box{{0.0, 0.0}, {1.0, 0.0}};
  req.checkpoints = {1.0, 2.0};
  const std::size_t replicas = 3000;
  const auto series = martingale_trajectory(sampler, req, replicas, 11);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> additive(replicas), derivative(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
      CHECK(series.additive_at(r, c, 0) == doctest::Approx(1.0).epsilon(1e-14));
      additive[r] = series.additive_at(r, c, 1);
      derivative[r] = series.derivative_at(r, c);
    }
    const auto a = estimate_mean(additive);
    CHECK(std::abs(a.mean - 1.0) < 4.0 * a.stderr_);
    const auto m = estimate_mean(derivative);
    CHECK(std::abs(m.mean) < 4.0 * m.stderr_);
  }
}

TEST_CASE("trajectory output is independent of the worker count") {
  const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(17), 0.2);
  MeasureRequest req;
  req.gammas = {1.0, std::sqrt(2.0)};
  req.region = Box{{0.0, 0.0}, {1.0, 0.0}};
  req.checkpoints = {1.0, 2.0};
  const auto a = martingale_trajectory(sampler, req, 40, 3, 1);
  const auto b = martingale_trajectory(sampler, req, 40, 3, 4);
  CHECK(a.additive == b.additive);
  CHECK(a.derivative == b.derivative);
}

TEST_CASE("request validation") {
  const auto g = grid1(9);
  MeasureRequest req;
  req.gammas = {-1.0};
  req.checkpoints = {1.0};
  CHECK_THROWS_AS(req.validate(g), ValidationError);
  req.gammas = {1.0};
  req.checkpoints = {2.0, 1.0};
  CHECK_THROWS_AS(req.validate(g), ValidationError);
}
