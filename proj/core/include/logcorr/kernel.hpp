#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "logcorr/quadrature.hpp"

namespace logcorr {

/// A point of R^d for d in {1, 2}; unused trailing coordinates are ignored.
using Point = std::array<double, 2>;

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

/// Sup norm over the first d coordinates.
double sup_norm(const Point& x, int d) noexcept;

/// Seed covariance kernel k(x) = prod_i k1(x_i), supported on the closed unit
/// sup-norm ball, with k(0) = 1.
class KernelSpec {
 public:
  /// Default profile: k1 = (b*b)/(b*b)(0), b(u) = (1 - 4u^2)_+ on [-1/2, 1/2].
  /// Closed form on |s| <= 1: k1(s) = 1 - 5s^2 + 5|s|^3 - |s|^5.
  static KernelSpec bump_autocorr(int d);

  /// Even profile tabulated on [0, 1] (u ascending, u[0] = 0), interpolated by
  /// PCHIP and divided by its value at 0. Values at u >= 1 are forced to 0.
  static KernelSpec tabulated(int d, std::vector<double> u, std::vector<double> values);

  /// Two-column text file "u value", '#' comments allowed.
  static KernelSpec from_table_file(int d, const std::filesystem::path& path);

  int dimension() const noexcept { return d_; }
  const std::string& profile_name() const noexcept { return name_; }
  bool is_default() const noexcept { return table_ == nullptr; }

  double quadrature_tolerance() const noexcept { return quad_tol_; }
  void set_quadrature_tolerance(double tol);

  /// One-dimensional factor k1(s).
  double profile(double s) const noexcept;

  /// Constant C with g(x) <= C |x|^2 near the origin (5d for the default profile,
  /// estimated from a second difference for tables).
  double g_curvature() const noexcept { return curvature_; }

 private:
  struct Table;
  KernelSpec() = default;

  int d_ = 1;
  std::string name_ = "bump-autocorr";
  double quad_tol_ = kDefaultQuadratureTolerance;
  double curvature_ = 5.0;
  std::shared_ptr<const Table> table_;
};

double eval_kernel(const KernelSpec& spec, const Point& x) noexcept;
double eval_g(const KernelSpec& spec, const Point& x) noexcept;

/// int_{s0}^{s1} k(e^u r) du. Splits at every u = -log|r_i| where a factor leaves
/// its support.
double cov_scale_integral(const KernelSpec& spec, double s0, double s1, const Point& r);

/// int_{s0}^{s1} k(e^u r)^2 du, the variance of the anchored stochastic integral.
double squared_scale_integral(const KernelSpec& spec, double s0, double s1, const Point& r);

/// sqrt(2d) int_0^t g(e^s u) ds; t may be kInfiniteTime, which gives
/// sqrt(2d) int_{-inf}^0 g(e^v u) dv.
double zeta(const KernelSpec& spec, const Point& u, double t);

/// int_{-inf}^0 [k((y - z)e^v) - k(y e^v) k(z e^v)] dv.
double limit_z_cov(const KernelSpec& spec, const Point& y, const Point& z);

/// Finite-time counterpart: int_0^t [k(e^s(u - v)) - k(e^s(x - u)) k(e^s(x - v))] ds.
double conditional_z_cov(const KernelSpec& spec, const Point& x, const Point& u, const Point& v,
                         double t);

/// Lower truncation point -(log(1/|u|) + 20) for the improper integrals.
double improper_lower_limit(double norm) noexcept;

double kappa_d(int d) noexcept;

/// Memoized zeta values. Concurrent readers proceed in parallel; a racing miss
/// may compute the same value twice, which is harmless.
class ZetaCache {
 public:
  explicit ZetaCache(KernelSpec spec) : spec_(std::move(spec)) {}
  double operator()(const Point& u, double t);
  std::size_t size() const;

 private:
  struct Key {
    double u0, u1, t;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  KernelSpec spec_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, double, KeyHash> values_;
};

}  // namespace logcorr
