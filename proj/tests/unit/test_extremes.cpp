#include <doctest.h>

#include <cmath>
#include <limits>

#include "logcorr/errors.hpp"
#include "logcorr/extremes.hpp"
#include "logcorr/rng.hpp"

using namespace logcorr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridSpec grid1(int n, double R = 1.0) {
  GridSpec g;
  g.d = 1;
  g.n = n;
  g.R = R;
  return g;
}

PathRecord path_of(std::vector<double> times, std::vector<double> values) {
  PathRecord p;
  p.times = std::move(times);
  p.values = std::move(values);
  return p;
}

PathRecord constant_path(double t, double value, double dt = 0.25) {
  PathRecord p;
  for (double s = 0.0; s <= t + 1e-12; s += dt) {
    p.times.push_back(s);
    p.values.push_back(value);
  }
  return p;
}

}  // namespace

TEST_CASE("centering") {
  CHECK(centering(1.0, 1) == 0.0);
  CHECK(centering(std::exp(2.0), 1) == doctest::Approx(-3.0 / std::sqrt(2.0)));
  CHECK(centering(std::exp(1.0), 2) == doctest::Approx(-0.75));
  CHECK(centering(8.0, 1) < centering(4.0, 1));
  CHECK_THROWS_AS(centering(0.0, 1), ValidationError);
}

TEST_CASE("max statistics") {
  const std::vector<double> one{0.7};
  const auto s = max_statistics(one);
  for (double q : s.quantiles) CHECK(q == 0.7);
  CHECK(s.counts.back() + s.counts.front() >= 1);
  const std::vector<double> none;
  CHECK_THROWS_AS(max_statistics(none), ValidationError);

  const std::vector<double> many{3.0, 1.0, 2.0, 5.0, 4.0};
  const auto m = max_statistics(many, 4);
  CHECK(m.median() == 3.0);
  std::size_t total = 0;
  for (auto c : m.counts) total += c;
  CHECK(total == 5);
}

TEST_CASE("region shrunk to one site gives the point value") {
  const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(17), 0.1);
  const Box point{{0.5, 0.0}, {0.5, 0.0}};
  const std::vector<double> cps{2.0};
  const auto recs = record_maxima(sampler, point, cps, 5, 9);
  for (const auto& r : recs) {
    const FieldState s = sampler.sample_field(2.0, 9, r.replica);
    CHECK(r.argmax == 8);
    CHECK(r.max == s.values[8]);
    const auto stats = max_statistics(std::span<const MaxRecord>(&r, 1), 1);
    CHECK(stats.sorted[0] == doctest::Approx(s.values[8] - centering(2.0, 1)));
  }
}

TEST_CASE("max record bookkeeping") {
  const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(33), 0.1);
  const Box all{{0.0, 0.0}, {1.0, 0.0}};
  const std::vector<double> cps{1.0, 3.0};
  const auto recs = record_maxima(sampler, all, cps, 4, 2);
  REQUIRE(recs.size() == 8);
  for (const auto& r : recs) {
    CHECK(r.terminal == r.max);
    CHECK(r.running_max >= r.terminal);
    CHECK(r.late_max >= r.terminal);
    CHECK(r.path.times.back() == doctest::Approx(r.t));
    CHECK(r.path.oscillation.size() == static_cast<std::size_t>(std::floor(r.t + 1e-9)));
  }
  // Checkpoints at the same replica share one trajectory.
  const FieldState s = sampler.sample_field(1.0, 2, 1);
  CHECK(recs[2].max == *std::max_element(s.values.begin(), s.values.end()));
}

TEST_CASE("grid maximum grows when the grid is refined") {
  const Box all{{0.0, 0.0}, {1.0, 0.0}};
  const std::vector<double> cps{4.0};
  double means[2];
  const int ns[2] = {9, 129};
  for (int k = 0; k < 2; ++k) {
    const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(ns[k]), 0.1);
    const auto recs = record_maxima(sampler, all, cps, 150, 21);
    double total = 0.0;
    for (const auto& r : recs) total += r.max;
    means[k] = total / 150.0;
  }
  CHECK(means[1] > means[0]);
}

TEST_CASE("tail ratio") {
  const std::vector<double> rho1{2.0};
  const std::vector<double> maxima{0.0, 5.0, -1.0, 3.0};
  const auto one = tail_ratio(maxima, 1.0, 1, rho1);
  CHECK(one.flatness == 1.0);
  CHECK(one.points[0].p_hat == 0.5);

  const std::vector<double> low(100, -10.0);
  const std::vector<double> rhos{2.0, 2.5, 3.0};
  const auto censored = tail_ratio(low, 16.0, 1, rhos);
  CHECK(censored.all_censored());
  for (const auto& p : censored.points) CHECK(p.p_hat == 0.0);
  CHECK(std::isnan(censored.flatness));

  RandomStream rng(4, 0, 0);
  std::vector<double> sample(5000);
  for (double& v : sample) v = centering(16.0, 1) + 1.5 * rng.normal();
  const auto est = tail_ratio(sample, 16.0, 1, rhos);
  for (std::size_t i = 1; i < est.points.size(); ++i) CHECK(est.points[i].p_hat <= est.points[i - 1].p_hat);
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(tail_ratio(sample, 16.0, 1, bad), ValidationError);
}

TEST_CASE("conditional tail estimator is unbiased for the binomial one") {
  const FieldSampler sampler(KernelSpec::bump_autocorr(1), grid1(17), 0.1);
  const std::vector<double> rhos{1.0, 1.5};
  const double t = 6.0;
  const std::size_t n = 4000;
  const auto cond = tail_ratio_conditional(sampler, t, rhos, n, 8);
  std::vector<double> maxima(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto s = sampler.sample_field(t, 1000 + r, 0);
    maxima[r] = *std::max_element(s.values.begin(), s.values.end());
  }
  const auto binom = tail_ratio(maxima, t, 1, rhos);
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    const double se = std::hypot(cond.points[i].stderr_, binom.points[i].stderr_);
    CHECK(std::abs(cond.points[i].p_hat - binom.points[i].p_hat) < 4.0 * se);
    // Averaging out the last Gaussian step can only reduce the variance.
    CHECK(cond.points[i].stderr_ < binom.points[i].stderr_);
  }
}

TEST_CASE("right-triangle classification") {
  const double t = 16.0;
  PathEventSpec spec;
  spec.t = t;
  spec.alpha = 0.0;
  spec.L = -centering(t, 1) + 1.0;
  CHECK(classify_path_event(constant_path(t, 0.0), spec));

  auto p = constant_path(t, 0.0);
  p.values[0] = 1.0;
  CHECK_FALSE(classify_path_event(p, spec));

  // Boundary paths are members: every inequality closed.
  spec.L = -centering(t, 1);
  CHECK(classify_path_event(constant_path(t, 0.0), spec));
}

TEST_CASE("closed triangle contains right triangle, monotone in L") {
  RandomStream rng(17, 0, 0);
  const double t = 8.0;
  for (int trial = 0; trial < 300; ++trial) {
    PathRecord p;
    double x = rng.uniform() - 0.5;
    for (int i = 0; i <= 64; ++i) {
      p.times.push_back(i * t / 64);
      p.values.push_back(x);
      x += std::sqrt(t / 64) * rng.normal() - 0.1;
    }
    PathEventSpec tri;
    tri.t = t;
    tri.alpha = 0.5;
    tri.L = 0.5;
    PathEventSpec closed = tri;
    closed.variant = PathEvent::ClosedRightTriangle;
    if (classify_path_event(p, tri)) CHECK(classify_path_event(p, closed));
    PathEventSpec wider = tri;
    wider.L = 2.0;
    if (classify_path_event(p, tri)) CHECK(classify_path_event(p, wider));
  }
}

TEST_CASE("classification needs checkpoints covering [0, t]") {
  PathEventSpec spec;
  spec.t = 4.0;
  CHECK_THROWS_AS(classify_path_event(path_of({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}), spec), ValidationError);
  CHECK_THROWS_AS(classify_path_event(path_of({0.5, 4.0}, {0.0, 0.0}), spec), ValidationError);
  spec.variant = PathEvent::GoodParticle;
  spec.L = 10.0;
  CHECK_THROWS_AS(classify_path_event(constant_path(4.0, -1.0), spec), ValidationError);
}

TEST_CASE("envelope and barrier values") {
  CHECK(envelope(10.0, 10.0) == 0.0);
  CHECK(envelope(4096.0, 10000.0) == doctest::Approx(2.0));
  CHECK(envelope(9000.0, 10000.0) == doctest::Approx(std::pow(1000.0, 1.0 / 12.0)));
  CHECK(barrier_value(2, std::exp(3.0), 100.0, 0.0, 0.0, 0.0, 1) == doctest::Approx(2.0800838));
  const double t = 100.0, rho = 1.5, D = 0.3, L = 2.0;
  CHECK(barrier_value(20, 1.0, t, L, D, rho, 1) == doctest::Approx(rho - 4.0 * std::pow(20.0, 1.0 / 12.0) + D));
  CHECK(barrier_value(60, 1.0, t, L, D, rho, 1) ==
        doctest::Approx(centering(t, 1) + rho + L - 4.0 * std::pow(40.0, 1.0 / 12.0) + D));
  CHECK_THROWS_AS(barrier_value(0, 1.0, t, L, D, rho, 1), ValidationError);
}

TEST_CASE("good particle conditions") {
  const double t = 4.0;
  PathEventSpec spec;
  spec.variant = PathEvent::GoodParticle;
  spec.t = t;
  spec.alpha = 0.0;
  spec.L = 10.0;
  spec.l = 1.0;
  spec.D = 8.0;
  spec.rho = 0.0;
  auto p = constant_path(t, -0.5);
  p.oscillation = {-kInf, 0.1, 0.1, 0.1};
  p.integer_values = {-0.5, -0.5, -0.5, -0.5};
  CHECK(classify_path_event(p, spec));

  auto wide = p;
  wide.oscillation[1] = envelope(2.0, t) + 0.5 * spec.D + 0.01;
  CHECK_FALSE(classify_path_event(wide, spec));

  auto high = p;
  high.integer_values[3] = barrier_value(4, spec.l, t, spec.L, spec.D, spec.rho, 1) + 0.01;
  CHECK_FALSE(classify_path_event(high, spec));

  // Not in the right triangle: the good-particle test fails before reading neighbourhoods.
  auto outside = p;
  outside.values[0] = 1.0;
  CHECK_FALSE(classify_path_event(outside, spec));
}

TEST_CASE("neighbourhood oscillation on a known field") {
  FieldHistory h;
  h.sites = 9;
  h.times = {0.0, 1.0, 2.0};
  h.values.assign(27, 0.0);
  for (std::size_t i = 0; i < 9; ++i) {
    h.values[9 + i] = static_cast<double>(i);        // t = 1
    h.values[18 + i] = static_cast<double>(i) * 2.0;  // t = 2
  }
  const auto g = grid1(9, 8.0);  // unit spacing
  PathRecord p;
  attach_neighbourhood(p, h, g, 4, 2.0, 1.0);
  // A_1(4): sites with |y - 4| >= 1, largest gap 4. A_2(4): e^{-1} <= |y - 4| < 1, no site.
  CHECK(p.oscillation[0] == 4.0);
  CHECK(p.oscillation[1] == -kInf);
  CHECK(p.integer_values[0] == 4.0);
  CHECK(p.integer_values[1] == 8.0);
}

TEST_CASE("limit-law fit recovers C* from synthetic data") {
  RandomStream rng(3, 0, 0);
  std::vector<double> mprime(400);
  for (double& m : mprime) m = std::exp(0.5 * rng.normal());
  const auto w = synthetic_limit_law(mprime, 1.0, 1, 40000, 5);
  std::vector<double> z;
  for (double v = -1.5; v <= 1.5 + 1e-9; v += 0.25) z.push_back(v);
  const auto fit = fit_limit_law(w, mprime, z, 1);
  CHECK(fit.c_star == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.n_max == 40000);
  CHECK(fit.n_mprime == 400);

  std::vector<double> scaled = mprime;
  for (double& m : scaled) m *= 3.0;
  const auto refit = fit_limit_law(w, scaled, z, 1);
  CHECK(refit.c_star == doctest::Approx(fit.c_star / 3.0).epsilon(1e-6));
  CHECK(refit.residual == doctest::Approx(fit.residual).epsilon(1e-6));
}

TEST_CASE("limit-law fit: single matching point and boundary failure") {
  const std::vector<double> m{1.0};
  // P(W <= 0) = exp(-C); with half of the samples at or below 0, C = log 2.
  const std::vector<double> w{-1.0, -0.5, 0.5, 1.0};
  const std::vector<double> z{0.0};
  const auto fit = fit_limit_law(w, m, z, 1);
  CHECK(fit.residual < 1e-9);
  CHECK(fit.c_star == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  const std::vector<double> never{5.0, 6.0};
  CHECK_THROWS_AS(fit_limit_law(never, m, z, 1), FitError);
  const std::vector<double> none;
  CHECK_THROWS_AS(fit_limit_law(none, m, z, 1), ValidationError);
}
