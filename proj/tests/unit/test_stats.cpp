#include <doctest.h>

#include <cmath>
#include <vector>

#include "logcorr/errors.hpp"
#include "logcorr/stats.hpp"

using namespace logcorr;

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == doctest::Approx(1000.0));
}

TEST_CASE("running stats") {
  RunningStats r;
  for (double v : {1.0, 2.0, 3.0, 4.0}) r.add(v);
  CHECK(r.mean() == doctest::Approx(2.5));
  CHECK(r.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(r.standard_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(quantile_sorted(xs, 0.5) == 3.0);
  CHECK(quantile_sorted(xs, 0.125) == doctest::Approx(1.5));
  CHECK(quantile_sorted(std::vector<double>{7.0}, 0.3) == 7.0);
  CHECK_THROWS_AS(quantile_sorted(std::vector<double>{}, 0.5), ValidationError);
}

TEST_CASE("distribution tails") {
  CHECK(standard_normal_cdf(0.0) == 0.5);
  CHECK(standard_normal_cdf(1.0) == doctest::Approx(0.8413447460685429));
  // chi-square with 2 dof has survival exp(-x/2)
  CHECK(chi_square_pvalue(3.0, 2.0) == doctest::Approx(std::exp(-1.5)));
  // Kolmogorov limit law: P(K > 1.3581) = 0.05
  CHECK(ks_pvalue(1.3581 / (std::sqrt(1e8) + 0.12 + 0.11 / 1e4), 100000000) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("covariance estimate") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10};
  CHECK(estimate_covariance(a, b).cov == doctest::Approx(5.0));
}
