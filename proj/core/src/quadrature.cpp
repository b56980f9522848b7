#include "logcorr/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "logcorr/errors.hpp"

namespace logcorr {

namespace {
constexpr unsigned kMaxDepth = 20;
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (!(a < b)) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  // boost's tolerance is relative to the L1 norm; a single-panel pass gives the
  // scale used to translate the absolute target.
  double error = 0.0;
  double l1 = 0.0;
  double value = GK::integrate(f, a, b, 0, 0.0, &error, &l1);
  if (error > 0.25 * abs_tol) {
    const double rel = std::max(0.25 * abs_tol / std::max(l1, abs_tol), 1e-14);
    value = GK::integrate(f, a, b, kMaxDepth, rel, &error, &l1);
  }
  if (!(error <= abs_tol) || !std::isfinite(value)) throw QuadratureError(error, abs_tol);
  return value;
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double abs_tol) {
  if (!(a < b)) return 0.0;
  std::vector<double> knots{a};
  for (double p : breakpoints) {
    if (p > a && p < b) knots.push_back(p);
  }
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  const double share = abs_tol / static_cast<double>(knots.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) total += integrate(f, knots[i], knots[i + 1], share);
  return total;
}

}  // namespace logcorr
