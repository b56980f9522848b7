#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "logcorr/kernel.hpp"

namespace logcorr {

/// Argument (x, g) of a functional F(x, g). `path` is g sampled every `dt` on
/// [0, sigma]; `field` is g on the points y e^b of a field grid.
struct FunctionalArg {
  double x = 0.0;
  std::span<const double> path;
  double dt = 0.0;
  std::span<const double> field;
};

struct Functional {
  std::string name;
  double bound = std::numeric_limits<double>::infinity();
  bool needs_field = false;
  std::function<double(const FunctionalArg&)> eval;

  double operator()(const FunctionalArg& arg) const { return eval(arg); }
};

Functional constant_functional(double c);

/// 1{g_sigma <= level}.
Functional endpoint_indicator(double level);

Functional sum(const Functional& a, const Functional& b);

/// Points of the odd n^d grid on [-1, 1]^d, row-major, and their cell weights.
struct UnitGrid {
  int d = 1;
  int n = 9;
  std::vector<Point> points;
  std::vector<double> weights;
  std::size_t centre = 0;

  static UnitGrid make(int d, int n);
};

struct FlbConfig {
  double L = 1.0;
  double b = 0.5;
  int n = 9;
  std::size_t inner_samples = 256;
  double delta = 0.05;
  std::uint64_t seed = 1;
};

/// F_{L,b}(x, g) = e^{-sqrt(2d)(x+L)} E_x[1{max_{[0,b]} Y(0) <= 0, Y_b(0) >= -L-1}
///   1{exists y: Y_b(y) >= -L - g(y e^b)} / lambda{y : Y_b(y) >= -L-1-g(y e^b)}]
/// with Y started at x on B(0, 1). The inner expectation averages a fixed bank
/// of field samples.
Functional flb_functional(const KernelSpec& kernel, const FlbConfig& config);

/// Registry: "constant" (value), "endpoint_indicator" (level), "flb" (L, b, n,
/// inner_samples, delta, seed).
Functional make_functional(const std::string& name, const std::map<std::string, double>& params,
                           const KernelSpec& kernel);

}  // namespace logcorr
