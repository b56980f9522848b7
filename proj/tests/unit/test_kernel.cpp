#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "logcorr/errors.hpp"
#include "logcorr/kernel.hpp"
#include "logcorr/rng.hpp"
#include "oracles.hpp"

using namespace logcorr;

namespace {
const KernelSpec k1d = KernelSpec::bump_autocorr(1);
const KernelSpec k2d = KernelSpec::bump_autocorr(2);
}  // namespace

TEST_CASE("kernel values") {
  CHECK(eval_kernel(k1d, {0.0, 0.0}) == 1.0);
  CHECK(eval_kernel(k2d, {0.0, 0.0}) == 1.0);
  CHECK(eval_kernel(k1d, {1.0, 0.0}) == 0.0);
  CHECK(eval_kernel(k1d, {-1.5, 0.0}) == 0.0);
  CHECK(eval_kernel(k2d, {0.2, 1.0}) == 0.0);
  CHECK(eval_kernel(k1d, {0.5, 0.0}) == doctest::Approx(0.34375).epsilon(1e-14));
  for (double s = 0.0; s < 1.0; s += 0.037) {
    CHECK(k1d.profile(s) == doctest::Approx(oracle::bump_profile(s)).epsilon(1e-10));
    CHECK(k1d.profile(s) == k1d.profile(-s));
    CHECK(std::abs(k1d.profile(s)) <= 1.0);
  }
  CHECK(eval_kernel(k2d, {0.3, -0.6}) == doctest::Approx(oracle::bump_kernel(0.3, -0.6)).epsilon(1e-10));
}

TEST_CASE("g = 1 - k") {
  CHECK(eval_g(k1d, {0.0, 0.0}) == 0.0);
  CHECK(eval_g(k1d, {1.0, 0.0}) == 1.0);
  CHECK(eval_g(k2d, {3.0, 0.1}) == 1.0);
  CHECK(eval_g(k1d, {0.5, 0.0}) == 1.0 - eval_kernel(k1d, {0.5, 0.0}));
  // g(w) <= C w^2 with C = 5d
  for (double w = 1e-4; w < 1.0; w *= 1.7) CHECK(eval_g(k2d, {w, w}) <= k2d.g_curvature() * w * w);
}

TEST_CASE("cov_scale_integral") {
  CHECK(cov_scale_integral(k1d, 0.0, 2.5, {0.0, 0.0}) == 2.5);
  CHECK(cov_scale_integral(k1d, 1.0, 3.0, {0.5, 0.0}) == 0.0);  // e^1 * 0.5 > 1
  CHECK(cov_scale_integral(k1d, 0.0, 4.0, {0.5, 0.0}) == doctest::Approx(0.0827305138932786).epsilon(1e-9));
  CHECK(cov_scale_integral(k1d, 0.0, 4.0, {0.5, 0.0}) ==
        doctest::Approx(oracle::scale_integral(0.0, 4.0, 0.5)).epsilon(1e-8));
  CHECK(cov_scale_integral(k1d, 0.0, 4.0, {0.1, 0.0}) == doctest::Approx(1.29258709299404568).epsilon(1e-9));
  CHECK_THROWS_AS(cov_scale_integral(k1d, 2.0, 1.0, {0.1, 0.0}), ValidationError);

  SUBCASE("nonincreasing in |r|") {
    double prev = cov_scale_integral(k1d, 0.0, 3.0, {0.0, 0.0});
    for (double r = 0.01; r < 1.2; r += 0.01) {
      const double c = cov_scale_integral(k1d, 0.0, 3.0, {r, 0.0});
      CHECK(c <= prev + 1e-12);
      prev = c;
    }
  }
  SUBCASE("additive under random splits") {
    RandomStream rng(11, 0, 0);
    for (int i = 0; i < 50; ++i) {
      const double r = rng.uniform() * 0.8;
      const double s0 = rng.uniform(), s2 = s0 + 4.0 * rng.uniform(), s1 = s0 + (s2 - s0) * rng.uniform();
      const double whole = cov_scale_integral(k1d, s0, s2, {r, 0.0});
      const double parts = cov_scale_integral(k1d, s0, s1, {r, 0.0}) + cov_scale_integral(k1d, s1, s2, {r, 0.0});
      CHECK(std::abs(whole - parts) <= 2e-8);
    }
  }
  SUBCASE("scaling identity") {
    for (double l : {0.3, 1.0, 2.2}) {
      for (double r : {0.01, 0.05, 0.2}) {
        const double shifted = cov_scale_integral(k1d, l, l + 1.5, {r, 0.0});
        const double dilated = cov_scale_integral(k1d, 0.0, 1.5, {r * std::exp(l), 0.0});
        CHECK(std::abs(shifted - dilated) <= 2.0 * kDefaultQuadratureTolerance);
      }
    }
  }
  SUBCASE("two dimensions") {
    const double ref = oracle::simpson(
        [](double u) { return oracle::bump_kernel(0.2 * std::exp(u), 0.4 * std::exp(u)); }, 0.0, std::log(2.5), 2000);
    CHECK(cov_scale_integral(k2d, 0.0, 3.0, {0.2, -0.4}) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("zeta") {
  CHECK(zeta(k1d, {0.0, 0.0}, 3.0) == 0.0);
  CHECK(zeta(k1d, {0.0, 0.0}, kInfiniteTime) == 0.0);
  CHECK(zeta(k1d, {0.4, 0.0}, 0.0) == 0.0);
  CHECK(zeta(k1d, {2.0, 0.0}, kInfiniteTime) == doctest::Approx(2.4416121579207454).epsilon(1e-8));
  CHECK(zeta(k1d, {0.5, 0.0}, kInfiniteTime) == doctest::Approx(0.5980944857536214).epsilon(1e-8));

  // Oracle: quadrature over (-V, 0] with e^{-V} |u| < 1e-8.
  const double u = 2.0;
  const double V = std::log(u / 1e-8);
  const double ref = std::sqrt(2.0) * (oracle::simpson([&](double v) { return 1.0 - oracle::bump_profile(std::exp(v) * u); },
                                                       -V, -std::log(u), 4000) +
                                       std::log(u));
  CHECK(zeta(k1d, {u, 0.0}, kInfiniteTime) == doctest::Approx(ref).epsilon(1e-7));

  SUBCASE("finite t is sqrt(2d)(t - covariance) and increases to the limit") {
    for (double t : {0.5, 1.0, 3.0}) {
      CHECK(zeta(k1d, {0.3, 0.0}, t) ==
            doctest::Approx(std::sqrt(2.0) * (t - cov_scale_integral(k1d, 0.0, t, {0.3, 0.0}))).epsilon(1e-9));
    }
    // zeta_t(u e^{-t}) increases to zeta(u)
    double prev = 0.0;
    const double lim = zeta(k1d, {0.7, 0.0}, kInfiniteTime);
    for (double t = 0.5; t <= 16.0; t *= 2.0) {
      const double z = zeta(k1d, {0.7 * std::exp(-t), 0.0}, t);
      CHECK(z >= prev - 1e-12);
      CHECK(z <= lim + 1e-8);
      prev = z;
    }
    CHECK(prev == doctest::Approx(lim).epsilon(1e-6));
  }
  SUBCASE("cache") {
    ZetaCache cache(k1d);
    const double a = cache({0.3, 0.0}, 2.0);
    CHECK(cache({0.3, 0.0}, 2.0) == a);
    CHECK(cache.size() == 1);
  }
}

TEST_CASE("limit Z covariance") {
  CHECK(limit_z_cov(k1d, {0.0, 0.0}, {0.0, 0.0}) == 0.0);
  CHECK(limit_z_cov(k1d, {1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(-0.3550519424647072).epsilon(1e-8));
  CHECK(limit_z_cov(k1d, {0.3, 0.0}, {0.7, 0.0}) == doctest::Approx(0.47000077149).epsilon(1e-8));
  CHECK(limit_z_cov(k1d, {0.3, 0.0}, {0.7, 0.0}) == limit_z_cov(k1d, {0.7, 0.0}, {0.3, 0.0}));
  CHECK(limit_z_cov(k2d, {0.3, 0.1}, {-0.2, 0.5}) == limit_z_cov(k2d, {-0.2, 0.5}, {0.3, 0.1}));
}

TEST_CASE("kappa_d") {
  CHECK(kappa_d(1) == doctest::Approx(1.0 / (4.0 * std::sqrt(2.0))));
  CHECK(kappa_d(2) == doctest::Approx(0.125));
}

TEST_CASE("tabulated profile") {
  std::vector<double> u, v;
  for (int i = 0; i <= 200; ++i) {
    u.push_back(i / 200.0);
    v.push_back(2.0 * oracle::bump_profile(i / 200.0));  // unnormalized on purpose
  }
  const auto tab = KernelSpec::tabulated(1, u, v);
  CHECK(tab.profile_name() == "tabulated");
  CHECK(eval_kernel(tab, {0.0, 0.0}) == 1.0);
  CHECK(eval_kernel(tab, {1.0, 0.0}) == 0.0);
  CHECK(eval_kernel(tab, {0.37, 0.0}) == doctest::Approx(oracle::bump_profile(0.37)).epsilon(1e-5));
  CHECK(zeta(tab, {0.5, 0.0}, kInfiniteTime) == doctest::Approx(zeta(k1d, {0.5, 0.0}, kInfiniteTime)).epsilon(1e-3));

  const auto path = std::filesystem::temp_directory_path() / "logcorr_kernel_table.txt";
  {
    std::ofstream out(path);
    out.precision(17);
    out << "# u value\n";
    for (std::size_t i = 0; i < u.size(); ++i) out << u[i] << ' ' << v[i] << '\n';
  }
  CHECK(eval_kernel(KernelSpec::from_table_file(1, path), {0.37, 0.0}) == eval_kernel(tab, {0.37, 0.0}));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(KernelSpec::from_table_file(1, "/nonexistent/table.txt"), ValidationError);
  CHECK_THROWS_AS(KernelSpec::tabulated(1, {0.0, 0.5}, {1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(KernelSpec::bump_autocorr(3), ValidationError);
}
