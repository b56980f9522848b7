#pragma once

#include <functional>
#include <span>

namespace logcorr {

inline constexpr double kDefaultQuadratureTolerance = 1e-8;

/// Adaptive Gauss-Kronrod (15/31 point) on [a, b] with an absolute error target.
/// Throws QuadratureError when the error estimate stays above `abs_tol`.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = kDefaultQuadratureTolerance);

/// Same as integrate() but splits [a, b] at the given interior points first,
/// each piece receiving an equal share of the tolerance.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints,
                           double abs_tol = kDefaultQuadratureTolerance);

}  // namespace logcorr
