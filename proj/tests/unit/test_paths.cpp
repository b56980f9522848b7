#include <doctest.h>

#include <cmath>
#include <numbers>

#include "logcorr/errors.hpp"
#include "logcorr/extremes.hpp"
#include "logcorr/paths.hpp"
#include "logcorr/stats.hpp"
#include "oracles.hpp"

using namespace logcorr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool within(const McEstimate& e, double exact, double sigmas) {
  return std::abs(e.estimate - exact) <= sigmas * e.stderr_;
}

}  // namespace

TEST_CASE("ballot exact") {
  CHECK(ballot_exact(1.0, 1.0) == doctest::Approx(0.682689492137).epsilon(1e-11));
  CHECK(ballot_exact(10.0, 0.01) > 1.0 - 1e-15);
  CHECK(ballot_exact(0.0, 1.0) == 0.0);
  CHECK(ballot_exact(1e-12, 1.0) < 1e-11);
  CHECK(ballot_exact(1.0, 4.0) == doctest::Approx(2.0 * oracle::normal_cdf(0.5) - 1.0));
  CHECK_THROWS_AS(ballot_exact(1.0, 0.0), ValidationError);
}

TEST_CASE("box ballot exact") {
  CHECK(box_ballot_exact(1.3, 0.0, kInf, 2.0) == doctest::Approx(ballot_exact(1.3, 2.0)).epsilon(1e-13));
  CHECK(box_ballot_exact(1.0, 0.7, 0.7, 2.0) == 0.0);
  const double whole = box_ballot_exact(1.0, 0.2, 2.0, 3.0);
  const double parts = box_ballot_exact(1.0, 0.2, 0.9, 3.0) + box_ballot_exact(1.0, 0.9, 2.0, 3.0);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-13));
  CHECK(box_ballot_exact(1.0, 0.5, 1.5, 2.0) ==
        doctest::Approx(oracle::box_ballot_quadrature(1.0, 0.5, 1.5, 2.0)).epsilon(1e-9));
  CHECK(box_ballot_exact(0.4, 1.0, 6.0, 9.0) ==
        doctest::Approx(oracle::box_ballot_quadrature(0.4, 1.0, 6.0, 9.0)).epsilon(1e-9));
  CHECK_THROWS_AS(box_ballot_exact(1.0, 2.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("box ballot against MC with crossing correction") {
  BarrierEvent e{"box", 2.0, -1.0, {{0.0, 2.0, -kInf, 0.0}}, {{2.0, -1.5, -0.5}}};
  const auto est = event_probability_mc(e, PathConfig{1e-2, 2.0, true}, 100000, 3);
  CHECK(within(est, box_ballot_exact(1.0, 0.5, 1.5, 2.0), 3.0));
}

TEST_CASE("ballot MC with and without crossing correction") {
  const std::vector<double> xs{0.5, 1.0, 2.0};
  const std::vector<double> ts{1.0, 4.0};
  const auto corrected = ballot_mc(xs, ts, PathConfig{1e-2, 4.0, true}, 40000, 9);
  const auto raw = ballot_mc(xs, ts, PathConfig{1e-2, 4.0, false}, 40000, 9);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double exact = ballot_exact(xs[i], ts[j]);
      CHECK(within(corrected[i * ts.size() + j], exact, 3.0));
      // Grid-only monitoring misses excursions between steps.
      CHECK(raw[i * ts.size() + j].estimate > exact + 3.0 * raw[i * ts.size() + j].stderr_);
    }
  }
}

TEST_CASE("ballot MC is independent of the worker count") {
  const std::vector<double> xs{1.0};
  const std::vector<double> ts{1.0};
  const auto a = ballot_mc(xs, ts, PathConfig{1e-2, 1.0, true}, 500, 2, 1);
  const auto b = ballot_mc(xs, ts, PathConfig{1e-2, 1.0, true}, 500, 2, 3);
  CHECK(a[0].estimate == b[0].estimate);
  CHECK(a[0].stderr_ == b[0].stderr_);
}

TEST_CASE("path simulators") {
  RandomStream rng(5, 0, 0);
  const PathConfig cfg{0.01, 50.0, true};
  const auto bm = simulate_bm(cfg, 0.0, rng);
  RunningStats inc;
  for (std::size_t i = 1; i < bm.size(); ++i) inc.add((bm[i] - bm[i - 1]) * (bm[i] - bm[i - 1]));
  CHECK(std::abs(inc.mean() - 0.01) < 4.0 * inc.standard_error());

  const auto times = PathConfig{0.3, 1.0, true}.times();
  CHECK(times.size() == 5);
  CHECK(times.back() == 1.0);
  CHECK_THROWS_AS(PathConfig({0.0, 1.0, true}).validate(), ValidationError);
  CHECK_THROWS_AS(PathConfig({2.0, 1.0, true}).validate(), ValidationError);

  const auto r = simulate_bessel3(cfg, 1.0, rng);
  for (double v : r) CHECK(v >= 0.0);
}

TEST_CASE("Bessel-3 marginal") {
  const auto res = bessel_marginal_check(1.0, 200000, 7);
  CHECK(res.pvalue > 1e-3);
  CHECK(res.dof == 29.0);
  CHECK(std::abs(res.mean - 2.0 * std::sqrt(2.0 / std::numbers::pi)) < 4.0 * res.stderr_);
  const auto t4 = bessel_marginal_check(4.0, 50000, 8);
  CHECK(t4.pvalue > 1e-3);
}

TEST_CASE("Williams minimum") {
  const auto two = williams_minimum_check(2.0, 20000, 1);
  CHECK(std::abs(two.mean - 1.0) < 4.0 * two.stderr_);
  CHECK_FALSE(two.horizon_warning);
  const auto one = williams_minimum_check(1.0, 20000, 2);
  CHECK(one.ks_pvalue > 1e-3);
  const auto zero = williams_minimum_check(0.0, 10, 3);
  for (double m : zero.minima) CHECK(m == 0.0);
  // A horizon far too short leaves the minimum still falling at the end.
  const auto short_run = williams_minimum_check(1.0, 2000, 4, 1, 0.05);
  CHECK(short_run.horizon_warning);
}

TEST_CASE("contradictory bounds give probability 0") {
  BarrierEvent e{"contradiction", 1.0, 0.0, {{0.0, 1.0, -kInf, -1.0}}, {{1.0, 0.0, kInf}}};
  const auto est = event_probability_mc(e, PathConfig{0.1, 1.0, true}, 1000, 1);
  CHECK(est.estimate == 0.0);
  CHECK(est.censored);
}

TEST_CASE("right triangle reduces to the box ballot") {
  const double t = 4.0, z = 0.8;
  const double a = centering(t, 1);
  const auto event = right_triangle_event(0.0, -a, t, 1, -z);
  const auto est = event_probability_mc(event, PathConfig{0.05, t, true}, 100000, 12);
  CHECK(within(est, box_ballot_exact(z, 0.0, 1.0 - a, t), 3.0));
}

TEST_CASE("evaluator on hand-built paths") {
  const double t = 4.0;
  const auto event = right_triangle_event(0.0, 5.0, t, 1);
  const BarrierEventEvaluator eval(event, PathConfig{1.0, t, false});
  REQUIRE(eval.times().size() == 5);
  const std::vector<double> flat(5, 0.0);
  CHECK(eval.weight(flat) == 1.0);
  const std::vector<double> up{0.0, 0.1, 0.0, 0.0, 0.0};
  CHECK(eval.weight(up) == 0.0);
  const BarrierEventEvaluator corrected(event, PathConfig{1.0, t, true});
  const std::vector<double> below(5, -1.0);
  CHECK(corrected.weight(below) == doctest::Approx(std::pow(1.0 - std::exp(-2.0), 4.0)));
}

TEST_CASE("lower sup bound on a segment") {
  // P(max_{[0,1]} B >= 1) = 2 (1 - Phi(1)).
  BarrierEvent e{"reach", 1.0, 0.0, {{0.0, 1.0, 1.0, kInf}}, {}};
  const auto est = event_probability_mc(e, PathConfig{0.25, 1.0, true}, 50000, 6);
  CHECK(within(est, 2.0 * (1.0 - oracle::normal_cdf(1.0)), 4.0));
  BarrierEvent overlap{"overlap", 1.0, 0.0, {{0.0, 1.0, 1.0, kInf}, {0.5, 1.0, 0.5, kInf}}, {}};
  CHECK_THROWS_AS(overlap.validate(), ValidationError);
}

TEST_CASE("closed triangle scaling in t") {
  const double z = 1.0, L = 1.0;
  std::vector<double> scaled;
  for (double t : {16.0, 64.0, 256.0}) {
    const auto event = closed_right_triangle_event(z, L, t, 1);
    const auto est = event_probability_mc(event, PathConfig{t / 64.0, t, true}, 40000, 13);
    REQUIRE_FALSE(est.censored);
    scaled.push_back(std::pow(t, 1.5) * est.estimate / (z * (1.0 + L) * (1.0 + L)));
  }
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  const double lo = *std::min_element(scaled.begin(), scaled.end());
  CHECK(hi / lo < 3.0);
}

TEST_CASE("black and diamond events") {
  const double t = 64.0, l = std::exp(2.0);
  const PathConfig cfg{1.0, t, true};
  const auto up = event_probability_mc(black_up_event(t, 4.0, 1.0, 2.0, l, 1), cfg, 20000, 1);
  const auto down = event_probability_mc(black_down_event(t, 4.0, 1.0, 2.0, l, 1), cfg, 20000, 1);
  const auto diamond = event_probability_mc(diamond_event(t, l, 1.0, 2.0, 0.5, 1), cfg, 20000, 1);
  for (const auto* e : {&up, &down, &diamond}) {
    CHECK(e->estimate > 0.0);
    CHECK(e->estimate < 1.0);
  }
  CHECK_THROWS_AS(black_up_event(t, 40.0, 1.0, 2.0, l, 1), ValidationError);
  CHECK_THROWS_AS(diamond_event(4.0, std::exp(3.0), 1.0, 2.0, 0.5, 1), ValidationError);
}

TEST_CASE("Girsanov tilt") {
  // The tilt is lognormal with log-variance 2dt; unit mean is only checkable at small t.
  const PathConfig cfg{0.1, 1.0, true};
  const auto one = girsanov_check(cfg, 1, [](std::span<const double>) { return 1.0; }, 20000, 3);
  CHECK(one.direct.estimate == 1.0);
  CHECK(std::abs(one.tilted.estimate - 1.0) < 4.0 * one.tilted.stderr_);

  const auto end = girsanov_check(cfg, 1, [](std::span<const double> p) { return p.back(); }, 20000, 4);
  const double drift = -std::sqrt(2.0);
  CHECK(std::abs(end.direct.estimate - drift) < 4.0 * end.direct.stderr_);
  CHECK(std::abs(end.tilted.estimate - drift) < 4.0 * end.tilted.stderr_);

  const double a = centering(8.0, 1);
  const auto above = girsanov_check(PathConfig{0.1, 8.0, true}, 1, [a](std::span<const double> p) { return p.back() >= a ? 1.0 : 0.0; },
                                    20000, 5);
  const double joint = std::hypot(above.direct.stderr_, above.tilted.stderr_);
  CHECK(std::abs(above.direct.estimate - above.tilted.estimate) < 4.0 * joint);
  CHECK(above.tilted.stderr_ < above.direct.stderr_);
}
