#include "logcorr/kernel.hpp"

#include <algorithm>
#include <cmath>

// boost 1.74's pchip.hpp calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <fstream>
#include <mutex>
#include <sstream>

#include "logcorr/errors.hpp"

namespace logcorr {

struct KernelSpec::Table {
  boost::math::interpolators::pchip<std::vector<double>> interp;
  double scale;
};

double sup_norm(const Point& x, int d) noexcept {
  double m = 0.0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

KernelSpec KernelSpec::bump_autocorr(int d) {
  if (d < 1 || d > 2) throw ValidationError("kernel dimension must be 1 or 2, got " + std::to_string(d));
  KernelSpec spec;
  spec.d_ = d;
  spec.curvature_ = 5.0 * d;
  return spec;
}

KernelSpec KernelSpec::tabulated(int d, std::vector<double> u, std::vector<double> values) {
  if (d < 1 || d > 2) throw ValidationError("kernel dimension must be 1 or 2, got " + std::to_string(d));
  if (u.size() != values.size() || u.size() < 4) {
    throw ValidationError("kernel table needs at least 4 (u, value) rows");
  }
  if (u.front() != 0.0) throw ValidationError("kernel table must start at u = 0");
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (!(u[i] > u[i - 1])) throw ValidationError("kernel table u column must be strictly increasing");
  }
  if (u.back() > 1.0) throw ValidationError("kernel table must lie within [0, 1]");
  const double at_zero = values.front();
  if (!(at_zero > 0.0)) throw ValidationError("kernel table value at u = 0 must be positive");
  if (u.back() < 1.0) {
    u.push_back(1.0);
    values.push_back(0.0);
  }

  KernelSpec spec;
  spec.d_ = d;
  spec.name_ = "tabulated";
  spec.table_ = std::make_shared<const Table>(
      Table{boost::math::interpolators::pchip<std::vector<double>>(std::move(u), std::move(values)),
            1.0 / at_zero});
  const double h = 1e-2;
  spec.curvature_ = d * std::max(0.0, (1.0 - spec.profile(h)) / (h * h));
  return spec;
}

KernelSpec KernelSpec::from_table_file(int d, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open kernel table " + path.string());
  std::vector<double> u, v;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double a, b;
    if (!(row >> a)) continue;
    if (!(row >> b)) throw ValidationError("malformed kernel table row in " + path.string() + ": " + line);
    u.push_back(a);
    v.push_back(b);
  }
  return tabulated(d, std::move(u), std::move(v));
}

void KernelSpec::set_quadrature_tolerance(double tol) {
  if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
  quad_tol_ = tol;
}

double KernelSpec::profile(double s) const noexcept {
  const double a = std::abs(s);
  if (a >= 1.0) return 0.0;
  if (!table_) {
    const double a2 = a * a;
    return 1.0 - 5.0 * a2 + 5.0 * a2 * a - a2 * a2 * a;
  }
  if (a == 0.0) return 1.0;
  return table_->interp(a) * table_->scale;
}

double eval_kernel(const KernelSpec& spec, const Point& x) noexcept {
  double k = 1.0;
  for (int i = 0; i < spec.dimension(); ++i) k *= spec.profile(x[i]);
  return k;
}

double eval_g(const KernelSpec& spec, const Point& x) noexcept { return 1.0 - eval_kernel(spec, x); }

namespace {

Point scaled(const Point& x, double f) noexcept { return {x[0] * f, x[1] * f}; }
Point diff(const Point& a, const Point& b) noexcept { return {a[0] - b[0], a[1] - b[1]}; }

// Scale-time past which e^u |r| >= 1.
double exit_time(double norm) noexcept {
  return norm > 0.0 ? -std::log(norm) : kInfiniteTime;
}

void check_order(double s0, double s1) {
  if (!(s0 <= s1)) throw ValidationError("scale integral needs s0 <= s1");
}

}  // namespace

double improper_lower_limit(double norm) noexcept {
  return -(std::log(1.0 / norm) + 20.0);
}

double cov_scale_integral(const KernelSpec& spec, double s0, double s1, const Point& r) {
  check_order(s0, s1);
  const double norm = sup_norm(r, spec.dimension());
  if (norm == 0.0) return s1 - s0;
  const double hi = std::min(s1, exit_time(norm));
  if (hi <= s0) return 0.0;
  return integrate([&](double u) { return eval_kernel(spec, scaled(r, std::exp(u))); }, s0, hi,
                   spec.quadrature_tolerance());
}

double squared_scale_integral(const KernelSpec& spec, double s0, double s1, const Point& r) {
  check_order(s0, s1);
  const double norm = sup_norm(r, spec.dimension());
  if (norm == 0.0) return s1 - s0;
  const double hi = std::min(s1, exit_time(norm));
  if (hi <= s0) return 0.0;
  return integrate(
      [&](double u) {
        const double k = eval_kernel(spec, scaled(r, std::exp(u)));
        return k * k;
      },
      s0, hi, spec.quadrature_tolerance());
}

double zeta(const KernelSpec& spec, const Point& u, double t) {
  if (!(t >= 0.0)) throw ValidationError("zeta needs t >= 0");
  const double norm = sup_norm(u, spec.dimension());
  if (norm == 0.0 || t == 0.0) return 0.0;
  const double root = std::sqrt(2.0 * spec.dimension());
  const double exit = exit_time(norm);
  const double lo = std::isinf(t) ? improper_lower_limit(norm) : 0.0;
  const double hi = std::isinf(t) ? 0.0 : t;

  if (std::isinf(t)) {
    const double tail = eval_g(spec, scaled(u, std::exp(lo)));
    if (tail > spec.quadrature_tolerance()) {
      throw NonIntegrableProfile("g does not vanish fast enough at the origin (g = " +
                                 std::to_string(tail) + " at the truncation point)");
    }
  }
  const double smooth_hi = std::min(hi, exit);
  double value = 0.0;
  if (smooth_hi > lo) {
    value = integrate([&](double s) { return eval_g(spec, scaled(u, std::exp(s))); }, lo, smooth_hi,
                      spec.quadrature_tolerance());
  }
  value += std::max(0.0, hi - std::max(lo, exit));
  return root * value;
}

double limit_z_cov(const KernelSpec& spec, const Point& y, const Point& z) {
  const int d = spec.dimension();
  const Point yz = diff(y, z);
  const double ny = sup_norm(y, d), nz = sup_norm(z, d), nyz = sup_norm(yz, d);
  const double largest = std::max({ny, nz, nyz});
  if (largest == 0.0) return 0.0;
  const double lo = improper_lower_limit(largest);
  const std::array<double, 3> breaks{exit_time(ny), exit_time(nz), exit_time(nyz)};
  return integrate_piecewise(
      [&](double v) {
        const double e = std::exp(v);
        return eval_kernel(spec, scaled(yz, e)) - eval_kernel(spec, scaled(y, e)) * eval_kernel(spec, scaled(z, e));
      },
      lo, 0.0, breaks, spec.quadrature_tolerance());
}

double conditional_z_cov(const KernelSpec& spec, const Point& x, const Point& u, const Point& v,
                         double t) {
  if (!(t >= 0.0)) throw ValidationError("conditional covariance needs t >= 0");
  const int d = spec.dimension();
  const Point uv = diff(u, v), xu = diff(x, u), xv = diff(x, v);
  const std::array<double, 3> breaks{exit_time(sup_norm(uv, d)), exit_time(sup_norm(xu, d)),
                                     exit_time(sup_norm(xv, d))};
  return integrate_piecewise(
      [&](double s) {
        const double e = std::exp(s);
        return eval_kernel(spec, scaled(uv, e)) - eval_kernel(spec, scaled(xu, e)) * eval_kernel(spec, scaled(xv, e));
      },
      0.0, t, breaks, spec.quadrature_tolerance());
}

double kappa_d(int d) noexcept { return 1.0 / (4.0 * std::sqrt(2.0 * d)); }

std::size_t ZetaCache::KeyHash::operator()(const Key& k) const noexcept {
  const std::hash<double> h;
  std::size_t seed = h(k.u0);
  seed ^= h(k.u1) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  seed ^= h(k.t) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

double ZetaCache::operator()(const Point& u, double t) {
  const Key key{u[0], spec_.dimension() > 1 ? u[1] : 0.0, t};
  {
    std::shared_lock lock(mutex_);
    if (const auto it = values_.find(key); it != values_.end()) return it->second;
  }
  const double value = zeta(spec_, u, t);
  std::unique_lock lock(mutex_);
  values_.emplace(key, value);
  return value;
}

std::size_t ZetaCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

}  // namespace logcorr
