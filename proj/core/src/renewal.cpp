#include "logcorr/renewal.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "logcorr/errors.hpp"
#include "logcorr/parallel.hpp"
#include "logcorr/sampler.hpp"
#include "logcorr/stats.hpp"

namespace logcorr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kRootTwoOverPi = std::sqrt(2.0 / std::numbers::pi);

double stay_above(double x1, double x2, double level, double h) {
  return bridge_stay_below(-x1, -x2, -level, h);
}

std::size_t step_count(double sigma, double dt) {
  return sigma > 0.0 ? static_cast<std::size_t>(std::ceil(sigma / dt - 1e-9)) : 0;
}

double checked(const Functional& f, const FunctionalArg& arg) {
  const double v = f(arg);
  if (!std::isfinite(v)) throw NumericalError("functional '" + f.name + "' returned a non-finite value");
  return v;
}

// (gamma, u) on 0 <= gamma <= u <= m, stratified in u^2 over `count` strata.
std::pair<double, double> triangle_point(std::size_t index, std::size_t count, double m, RandomStream& rng) {
  const double v = (static_cast<double>(index) + rng.uniform()) / static_cast<double>(count);
  const double u = m * std::sqrt(v);
  return {u * rng.uniform(), u};
}

}  // namespace

double sample_inverse_gaussian(double mu, double lambda, RandomStream& rng) {
  if (!(mu > 0.0) || !(lambda > 0.0)) throw ValidationError("inverse Gaussian needs mu, lambda > 0");
  const double n = rng.normal();
  const double y = n * n;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   (mu / (2.0 * lambda)) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  return rng.uniform() <= mu / (mu + x) ? x : mu * mu / x;
}

double bridge_hitting_time(double a, double c, double h, RandomStream& rng) {
  if (!(a > 0.0) || !(c >= 0.0) || !(h > 0.0)) throw ValidationError("bridge hitting time needs a > 0, c >= 0, h > 0");
  // Under s = h u / (h + u) the bridge hits 0 when a Brownian motion with drift
  // c / h first reaches a.
  double u;
  if (c <= 1e-12 * a) {
    const double n = rng.normal();
    u = a * a / (n * n);
  } else {
    u = sample_inverse_gaussian(a * h / c, a * a, rng);
  }
  return h * u / (h + u);
}

ConcatPath concatenated_path(double gamma, double sigma, double dt, RandomStream& rng) {
  if (!(gamma >= 0.0) || !(sigma >= 0.0) || !(dt > 0.0)) {
    throw ValidationError("concatenated path needs gamma >= 0, sigma >= 0, dt > 0");
  }
  const std::size_t steps = step_count(sigma, dt);
  ConcatPath out;
  out.values.assign(steps + 1, 0.0);
  out.step = steps > 0 ? sigma / static_cast<double>(steps) : 0.0;
  out.hit_time = gamma <= 0.0 ? 0.0 : kInf;
  const double h = out.step;
  bool crossed = gamma <= 0.0;
  std::array<double, 3> v{0.0, 0.0, 0.0};
  double x = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    if (!crossed) {
      const double next = x + std::sqrt(h) * rng.normal();
      const double a = x + gamma, c = next + gamma;
      const bool hit = c <= 0.0 || rng.uniform() < std::exp(-2.0 * a * c / h);
      if (!hit) {
        x = next;
      } else {
        const double tau = bridge_hitting_time(a, std::abs(c), h, rng);
        out.hit_time = static_cast<double>(i) * h + tau;
        const double rest = std::sqrt(std::max(0.0, h - tau));
        for (double& comp : v) comp = rest * rng.normal();
        x = -gamma + std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        crossed = true;
      }
    } else {
      const double sd = std::sqrt(h);
      for (double& comp : v) comp += sd * rng.normal();
      x = -gamma + std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    out.values[i + 1] = x;
  }
  return out;
}

std::vector<double> reverse_path(std::span<const double> g) {
  std::vector<double> out(g.size());
  if (g.empty()) return out;
  const double end = g.back();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[g.size() - 1 - i] - end;
  return out;
}

void RenewalConfig::validate() const {
  if (!(alpha >= 1.0) || !(z >= 1.0)) throw ValidationError("renewal needs alpha, z >= 1");
  if (!(m >= 0.0) || !(sigma >= 0.0) || !(dt > 0.0)) throw ValidationError("renewal needs m, sigma >= 0 and dt > 0");
  if (!(t > 0.0) || !(sigma <= 0.5 * t)) throw ValidationError("renewal needs t > 0 and sigma <= t/2");
  if (paths == 0) throw ValidationError("renewal needs at least one path");
}

McEstimate renewal_lhs(const Functional& f, const RenewalConfig& config) {
  config.validate();
  const double t = config.t, half = 0.5 * t, alpha = config.alpha, z = config.z, sigma = config.sigma;
  const std::size_t fine = step_count(sigma, config.dt);
  const double h = fine > 0 ? sigma / static_cast<double>(fine) : 0.0;
  const double scale = std::pow(t, 1.5) / alpha;
  std::vector<double> samples(config.paths);
  parallel_for(config.paths, config.workers, [&](std::size_t r) {
    RandomStream rng(config.seed, r, 0);
    thread_local std::vector<double> path;
    path.assign(fine + 1, 0.0);
    const double end = z + config.m * rng.uniform();
    double w = config.m * std::exp(-0.5 * (end - alpha) * (end - alpha) / t) / std::sqrt(2.0 * std::numbers::pi * t);
    const double mid = 0.5 * (alpha + end) + 0.5 * std::sqrt(t) * rng.normal();
    if (mid < z) {
      samples[r] = 0.0;
      return;
    }
    w *= stay_above(alpha, mid, 0.0, half);
    double x = mid;
    if (fine == 0) {
      w *= stay_above(mid, end, z, half);
    } else {
      const double gap = half - sigma;
      double start = mid;
      if (gap > 0.0) {
        start = mid + (gap / half) * (end - mid) + std::sqrt(gap * sigma / half) * rng.normal();
        w *= stay_above(mid, start, z, gap);
      }
      x = start;
      for (std::size_t i = 0; i < fine && w > 0.0; ++i) {
        const double left = sigma - static_cast<double>(i) * h;
        double next = end;
        if (i + 1 < fine) next = x + (h / left) * (end - x) + std::sqrt(h * (left - h) / left) * rng.normal();
        w *= stay_above(x, next, z, h);
        x = next;
        path[i + 1] = x - start;
      }
    }
    if (w == 0.0) {
      samples[r] = 0.0;
      return;
    }
    samples[r] = scale * w * checked(f, {end - z, path, h, {}});
  });
  return summarize(samples);
}

McEstimate renewal_rhs(const Functional& f, const RenewalConfig& config) {
  if (!(config.m >= 0.0) || !(config.sigma >= 0.0) || !(config.dt > 0.0) || config.paths == 0) {
    throw ValidationError("renewal RHS needs m, sigma >= 0, dt > 0 and paths > 0");
  }
  const double area = kRootTwoOverPi * 0.5 * config.m * config.m;
  std::vector<double> samples(config.paths);
  parallel_for(config.paths, config.workers, [&](std::size_t r) {
    RandomStream rng(config.seed, r, 0);
    const auto [gamma, u] = triangle_point(r, config.paths, config.m, rng);
    const ConcatPath x = concatenated_path(gamma, config.sigma, config.dt, rng);
    const auto g = reverse_path(x.values);
    samples[r] = area * checked(f, {u, g, x.step, {}});
  });
  return summarize(samples);
}

McEstimate renewal_rhs_factorized(double level, const RenewalConfig& config, int nodes) {
  if (!(config.m >= 0.0) || !(config.sigma >= 0.0) || !(config.dt > 0.0)) {
    throw ValidationError("renewal RHS needs m, sigma >= 0 and dt > 0");
  }
  if (nodes != 16) throw ValidationError("factorized renewal RHS uses 16 Gauss-Legendre nodes");
  using Rule = boost::math::quadrature::gauss<double, 16>;
  std::vector<double> abscissa, weight;
  for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
    abscissa.push_back(Rule::abscissa()[i]);
    weight.push_back(Rule::weights()[i]);
    abscissa.push_back(-Rule::abscissa()[i]);
    weight.push_back(Rule::weights()[i]);
  }
  const std::size_t per_node = std::max<std::size_t>(2, config.paths / abscissa.size());
  const double half = 0.5 * config.m;
  CompensatedSum value;
  double variance = 0.0;
  for (std::size_t k = 0; k < abscissa.size(); ++k) {
    const double gamma = half * (1.0 + abscissa[k]);
    std::vector<double> hits(per_node);
    parallel_for(per_node, config.workers, [&](std::size_t r) {
      RandomStream rng(config.seed, r, static_cast<std::uint32_t>(k + 1));
      const ConcatPath x = concatenated_path(gamma, config.sigma, config.dt, rng);
      hits[r] = -x.values.back() <= level ? 1.0 : 0.0;
    });
    const McEstimate q = summarize(hits);
    const double c = kRootTwoOverPi * half * weight[k] * (config.m - gamma);
    value.add(c * q.estimate);
    variance += c * c * q.stderr_ * q.stderr_;
  }
  return {value.value(), std::sqrt(variance), per_node * abscissa.size(), value.value() == 0.0};
}

void CMSigmaConfig::validate() const {
  if (!(M >= 0.0) || !(sigma >= 0.0) || !(b > 0.0) || !(dt > 0.0)) {
    throw ValidationError("C_{M,sigma} needs M, sigma >= 0 and b, dt > 0");
  }
  if (paths == 0) throw ValidationError("C_{M,sigma} needs at least one path");
}

McEstimate constant_c_m_sigma(const Functional& f, const KernelSpec& kernel, const CMSigmaConfig& config) {
  config.validate();
  if (config.M == 0.0) return {0.0, 0.0, config.paths, true};
  const UnitGrid grid = UnitGrid::make(kernel.dimension(), config.n);
  const std::size_t size = grid.points.size();

  std::vector<double> gram(size * size);
  double scale = 1.0;
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = a; b < size; ++b) {
      gram[a * size + b] = gram[b * size + a] = limit_z_cov(kernel, grid.points[a], grid.points[b]);
    }
    scale = std::max(scale, gram[a * size + a]);
  }
  const auto factor = psd_factor(gram, size, 1e-6 * scale);
  std::vector<double> zeta_values(size);
  for (std::size_t j = 0; j < size; ++j) zeta_values[j] = zeta(kernel, grid.points[j], kInfiniteTime);

  const std::size_t steps = step_count(config.sigma, config.dt);
  const double h = steps > 0 ? config.sigma / static_cast<double>(steps) : 0.0;
  std::vector<double> g_weights(steps * size);
  for (std::size_t i = 0; i < steps; ++i) {
    const double e = std::exp(-static_cast<double>(i) * h);
    for (std::size_t j = 0; j < size; ++j) {
      g_weights[i * size + j] = eval_g(kernel, {grid.points[j][0] * e, grid.points[j][1] * e});
    }
  }

  const double area = kRootTwoOverPi * 0.5 * config.M * config.M;
  std::vector<double> samples(config.paths);
  parallel_for(config.paths, config.workers, [&](std::size_t r) {
    RandomStream rng(config.seed, r, 0);
    const auto [gamma, u] = triangle_point(r, config.paths, config.M, rng);
    const ConcatPath x = concatenated_path(gamma, config.sigma, config.dt, rng);

    RandomStream zrng(config.seed, r, 1);
    thread_local std::vector<double> noise, field;
    noise.resize(size);
    field.resize(size);
    zrng.fill_normal(noise);
    for (std::size_t j = 0; j < size; ++j) {
      double zj = 0.0;
      for (std::size_t k = 0; k < size; ++k) zj += factor[j * size + k] * noise[k];
      double integral = 0.0;
      for (std::size_t i = 0; i < steps; ++i) integral += g_weights[i * size + j] * (x.values[i + 1] - x.values[i]);
      field[j] = zj - zeta_values[j] - integral;
    }
    const double value = checked(f, {-u, x.values, x.step, field});
    if (value < 0.0 || value > f.bound * (1.0 + 1e-12)) {
      throw ValidationError("functional '" + f.name + "' left its declared bound");
    }
    samples[r] = area * std::min(value, config.M);
  });
  return summarize(samples);
}

}  // namespace logcorr
