#include "logcorr/paths.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "logcorr/errors.hpp"
#include "logcorr/extremes.hpp"
#include "logcorr/parallel.hpp"
#include "logcorr/stats.hpp"

namespace logcorr {

namespace {
constexpr double kTimeTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this exponent 1 - e^{-x} rounds to 1 in double precision.
constexpr double kExpCutoff = 37.0;

std::vector<double> equal_steps(std::span<const double> knots, double dt) {
  std::vector<double> out{knots.front()};
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double len = knots[i + 1] - knots[i];
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / dt - kTimeTol)));
    for (std::size_t j = 1; j < k; ++j) out.push_back(knots[i] + len * static_cast<double>(j) / static_cast<double>(k));
    out.push_back(knots[i + 1]);
  }
  return out;
}

std::size_t index_of(std::span<const double> times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-7);
  if (it == times.end() || std::abs(*it - t) > 1e-7) {
    throw ValidationError("time " + std::to_string(t) + " is not on the path grid");
  }
  return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

void PathConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("path dt must be positive");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw ValidationError("path horizon must be finite and >= dt");
}

std::vector<double> PathConfig::times() const {
  validate();
  const std::array<double, 2> knots{0.0, horizon};
  return equal_steps(knots, dt);
}

McEstimate summarize(std::span<const double> samples) {
  RunningStats s;
  for (double v : samples) s.add(v);
  McEstimate e;
  e.estimate = s.mean();
  e.stderr_ = samples.size() > 1 ? s.standard_error() : 0.0;
  e.n = samples.size();
  e.censored = std::all_of(samples.begin(), samples.end(), [](double v) { return v == 0.0; });
  return e;
}

double ballot_exact(double x, double t) {
  if (!(x >= 0.0) || !(t > 0.0)) throw ValidationError("ballot needs x >= 0 and t > 0");
  return std::erf(x / std::sqrt(2.0 * t));
}

double box_ballot_exact(double z, double a, double b, double t) {
  if (!(z > 0.0) || !(t > 0.0) || !(a >= 0.0) || !(b >= a)) {
    throw ValidationError("box ballot needs z > 0, t > 0 and 0 <= a <= b");
  }
  const double s = std::sqrt(t);
  const auto window = [&](double shift) {
    const double upper = standard_normal_cdf((-a + shift) / s);
    const double lower = std::isinf(b) ? 0.0 : standard_normal_cdf((-b + shift) / s);
    return upper - lower;
  };
  return std::max(0.0, window(z) - window(-z));
}

std::vector<double> simulate_bm(const PathConfig& config, double start, RandomStream& rng) {
  const auto times = config.times();
  std::vector<double> path(times.size());
  path[0] = start;
  for (std::size_t i = 1; i < times.size(); ++i) {
    path[i] = path[i - 1] + std::sqrt(times[i] - times[i - 1]) * rng.normal();
  }
  return path;
}

std::vector<double> simulate_bessel3(const PathConfig& config, double start, RandomStream& rng) {
  if (!(start >= 0.0)) throw ValidationError("Bessel-3 start must be nonnegative");
  const auto times = config.times();
  std::vector<double> path(times.size());
  std::array<double, 3> v{start, 0.0, 0.0};
  path[0] = start;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double sd = std::sqrt(times[i] - times[i - 1]);
    for (double& c : v) c += sd * rng.normal();
    path[i] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  return path;
}

double bridge_stay_below(double x1, double x2, double u, double h) noexcept {
  if (std::isinf(u) && u > 0.0) return 1.0;
  if (!(x1 < u) || !(x2 < u)) return 0.0;
  const double e = 2.0 * (u - x1) * (u - x2) / h;
  return e > kExpCutoff ? 1.0 : -std::expm1(-e);
}

void BarrierEvent::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("event horizon must be positive");
  if (!std::isfinite(start)) throw ValidationError("event start must be finite");
  for (const auto& c : sups) {
    if (!(c.t0 >= -kTimeTol) || !(c.t1 <= horizon + kTimeTol) || !(c.t0 <= c.t1 + kTimeTol)) {
      throw ValidationError("event '" + name + "': barrier segments must be ordered inside [0, t]");
    }
  }
  for (const auto& p : points) {
    if (!(p.t >= -kTimeTol) || !(p.t <= horizon + kTimeTol)) {
      throw ValidationError("event '" + name + "': point constraint outside [0, t]");
    }
  }
  for (std::size_t i = 0; i < sups.size(); ++i) {
    for (std::size_t j = i + 1; j < sups.size(); ++j) {
      if (std::isinf(sups[i].lo) || std::isinf(sups[j].lo)) continue;
      if (sups[i].t0 < sups[j].t1 - kTimeTol && sups[j].t0 < sups[i].t1 - kTimeTol) {
        throw ValidationError("event '" + name + "': lower sup bounds must sit on disjoint segments");
      }
    }
  }
}

BarrierEvent right_triangle_event(double alpha, double L, double t, int d, double start) {
  const double a = centering(t, d);
  BarrierEvent e{"right_triangle", t, start, {}, {}};
  e.sups = {{0.0, t, -kInf, alpha}, {0.5 * t, t, -kInf, a + alpha + L}};
  e.points = {{t, a + alpha - 1.0, kInf}};
  return e;
}

BarrierEvent closed_right_triangle_event(double alpha, double L, double t, int d, double start) {
  const double a = centering(t, d);
  BarrierEvent e{"closed_right_triangle", t, start, {}, {}};
  e.sups = {{0.0, t, -kInf, alpha + 1.0}, {0.5 * t, t, -kInf, a + alpha + L + 1.0}};
  e.points = {{t, a + alpha - 2.0, kInf}};
  return e;
}

namespace {

void check_windows(double t, double a, double l) {
  if (!(l >= 1.0) || !(std::log(l) <= 0.5 * t) || !(a >= 0.0) || !(t - a >= 0.5 * t)) {
    throw ValidationError("barrier segments must satisfy 0 <= log l <= t/2 <= t - a <= t");
  }
}

}  // namespace

BarrierEvent black_up_event(double t, double a, double z, double L, double l, int d, double start) {
  check_windows(t, a, l);
  const double at = centering(t, d);
  BarrierEvent e{"black_up", t, start, {}, {}};
  e.sups = {{std::log(l), 0.5 * t, -kInf, z},
            {0.5 * t, t - a, at + z + L - 1.0, at + z + L},
            {t - a, t, -kInf, at + z + L}};
  e.points = {{t, at + z - 1.0, at + z}};
  return e;
}

BarrierEvent black_down_event(double t, double a, double z, double L, double l, int d, double start) {
  check_windows(t, a, l);
  const double at = centering(t, d);
  BarrierEvent e{"black_down", t, start, {}, {}};
  e.sups = {{std::log(l), 0.5 * t, -kInf, z},
            {0.5 * t, t - a, -kInf, at + z + L - 1.0},
            {t - a, t, at + z + L - 1.0, at + z + L}};
  return e;
}

BarrierEvent diamond_event(double t, double l, double alpha, double L, double m, int d, double start) {
  check_windows(t, 0.0, l);
  const double at = centering(t, d);
  BarrierEvent e{"diamond", t, start, {}, {}};
  e.sups = {{0.0, std::log(l), alpha, kInf}, {std::log(l), t, -kInf, alpha}, {0.5 * t, t, -kInf, at + alpha + L}};
  e.points = {{t, at + alpha + m - 1.0, at + alpha + m}};
  return e;
}

BarrierEventEvaluator::BarrierEventEvaluator(BarrierEvent event, const PathConfig& config)
    : event_(std::move(event)), correction_(config.crossing_correction) {
  config.validate();
  event_.validate();
  // A sup over a single instant is a point constraint.
  std::vector<SupConstraint> sups;
  for (const auto& c : event_.sups) {
    if (c.t1 - c.t0 <= kTimeTol) {
      event_.points.push_back({c.t0, c.lo, c.hi});
    } else {
      sups.push_back(c);
    }
  }
  event_.sups = sups;

  std::vector<double> knots{0.0, event_.horizon};
  for (const auto& c : event_.sups) {
    knots.push_back(c.t0);
    knots.push_back(c.t1);
  }
  for (const auto& p : event_.points) knots.push_back(p.t);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(), [](double x, double y) { return y - x <= kTimeTol; }),
              knots.end());
  times_ = equal_steps(knots, config.dt);

  const std::size_t steps = times_.size() - 1;
  upper_.assign(steps, kInf);
  group_of_.assign(steps, -1);
  for (const auto& c : event_.sups) {
    const std::size_t first = index_of(times_, c.t0), last = index_of(times_, c.t1);
    for (std::size_t e = first; e < last; ++e) upper_[e] = std::min(upper_[e], c.hi);
    if (!std::isinf(c.lo)) {
      for (std::size_t e = first; e < last; ++e) group_of_[e] = static_cast<int>(groups_.size());
      groups_.push_back({first, last, c.lo});
    }
  }
  for (const auto& p : event_.points) points_.emplace_back(index_of(times_, p.t), p);
}

double BarrierEventEvaluator::weight(std::span<const double> path) const {
  if (path.size() != times_.size()) throw ValidationError("path does not match the event grid");
  for (const auto& [i, p] : points_) {
    if (!(path[i] >= p.lo && path[i] <= p.hi)) return 0.0;
  }
  double w = 1.0;
  for (std::size_t e = 0; e + 1 < times_.size(); ++e) {
    if (group_of_[e] >= 0) continue;
    if (correction_) {
      w *= bridge_stay_below(path[e], path[e + 1], upper_[e], times_[e + 1] - times_[e]);
    } else if (path[e] > upper_[e] || path[e + 1] > upper_[e]) {
      w = 0.0;
    }
    if (w == 0.0) return 0.0;
  }
  for (const auto& g : groups_) {
    if (correction_) {
      double below_upper = 1.0, below_lower = 1.0;
      for (std::size_t e = g.first; e < g.last; ++e) {
        const double h = times_[e + 1] - times_[e];
        below_upper *= bridge_stay_below(path[e], path[e + 1], upper_[e], h);
        below_lower *= bridge_stay_below(path[e], path[e + 1], std::min(upper_[e], g.lo), h);
      }
      w *= std::max(0.0, below_upper - below_lower);
    } else {
      double top = -kInf;
      for (std::size_t i = g.first; i <= g.last; ++i) {
        if (path[i] > upper_[std::min(i, g.last - 1)]) return 0.0;
        top = std::max(top, path[i]);
      }
      if (top < g.lo) return 0.0;
    }
    if (w == 0.0) return 0.0;
  }
  return w;
}

McEstimate event_probability_mc(const BarrierEvent& event, const PathConfig& config, std::size_t paths,
                                std::uint64_t seed, unsigned workers) {
  if (paths == 0) throw ValidationError("event probability needs at least one path");
  const BarrierEventEvaluator evaluator(event, config);
  const auto& times = evaluator.times();
  std::vector<double> samples(paths);
  parallel_for(paths, workers, [&](std::size_t r) {
    thread_local std::vector<double> path;
    path.resize(times.size());
    RandomStream rng(seed, r, 0);
    path[0] = event.start;
    for (std::size_t i = 1; i < times.size(); ++i) {
      path[i] = path[i - 1] + std::sqrt(times[i] - times[i - 1]) * rng.normal();
    }
    samples[r] = evaluator.weight(path);
  });
  return summarize(samples);
}

std::vector<McEstimate> ballot_mc(std::span<const double> xs, std::span<const double> ts, const PathConfig& config,
                                  std::size_t paths, std::uint64_t seed, unsigned workers) {
  if (xs.empty() || ts.empty() || paths == 0) throw ValidationError("ballot MC needs x values, times and paths");
  for (double x : xs) {
    if (!(x > 0.0)) throw ValidationError("ballot MC needs x > 0");
  }
  PathConfig cfg = config;
  cfg.horizon = *std::max_element(ts.begin(), ts.end());
  const auto times = cfg.times();
  std::vector<std::size_t> stops;
  for (double t : ts) stops.push_back(index_of(times, t));

  const std::size_t nx = xs.size(), nt = ts.size();
  std::vector<double> samples(paths * nx * nt);
  parallel_for(paths, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, 0);
    thread_local std::vector<double> w;
    w.assign(nx, 1.0);
    double x1 = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double h = times[i] - times[i - 1];
      const double x2 = x1 + std::sqrt(h) * rng.normal();
      for (std::size_t k = 0; k < nx; ++k) {
        if (w[k] == 0.0) continue;
        if (cfg.crossing_correction) {
          w[k] *= bridge_stay_below(x1, x2, xs[k], h);
        } else if (x2 > xs[k]) {
          w[k] = 0.0;
        }
      }
      for (std::size_t j = 0; j < nt; ++j) {
        if (stops[j] == i) {
          for (std::size_t k = 0; k < nx; ++k) samples[(r * nx + k) * nt + j] = w[k];
        }
      }
      x1 = x2;
    }
  });

  std::vector<McEstimate> out;
  std::vector<double> column(paths);
  for (std::size_t k = 0; k < nx; ++k) {
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t r = 0; r < paths; ++r) column[r] = samples[(r * nx + k) * nt + j];
      out.push_back(summarize(column));
    }
  }
  return out;
}

GirsanovResult girsanov_check(const PathConfig& config, int d, const PathFunctional& f, std::size_t paths,
                              std::uint64_t seed, unsigned workers) {
  if (paths == 0) throw ValidationError("Girsanov check needs at least one path");
  if (d < 1) throw ValidationError("dimension must be positive");
  const auto times = config.times();
  const double root = std::sqrt(2.0 * d);
  const double t = times.back();
  std::vector<double> direct(paths), tilted(paths);
  parallel_for(paths, workers, [&](std::size_t r) {
    thread_local std::vector<double> path;
    path.resize(times.size());
    RandomStream a(seed, r, 0);
    path[0] = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double h = times[i] - times[i - 1];
      path[i] = path[i - 1] - root * h + std::sqrt(h) * a.normal();
    }
    direct[r] = f(path);
    RandomStream b(seed, r, 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
      path[i] = path[i - 1] + std::sqrt(times[i] - times[i - 1]) * b.normal();
    }
    tilted[r] = f(path) * std::exp(-root * path.back() - d * t);
  });
  return {summarize(direct), summarize(tilted)};
}

WilliamsResult williams_minimum_check(double x, std::size_t paths, std::uint64_t seed, unsigned workers,
                                      double horizon_factor) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("Williams check needs x >= 0");
  if (paths == 0) throw ValidationError("Williams check needs at least one path");
  WilliamsResult out;
  out.minima.assign(paths, 0.0);
  if (x == 0.0) return out;

  const double h0 = 0.01 * x * x, ratio = 1.05, horizon = horizon_factor * x * x;
  std::vector<double> steps;
  for (double h = h0, total = 0.0; total < horizon; h *= ratio) {
    steps.push_back(h);
    total += h;
  }
  std::vector<unsigned char> late(paths, 0);
  parallel_for(paths, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, 0);
    std::array<double, 3> v{x, 0.0, 0.0};
    double r1 = x, lowest = x;
    std::size_t at = 0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const double h = steps[k];
      const double sd = std::sqrt(h);
      for (double& c : v) c += sd * rng.normal();
      const double r2 = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      // Minimum of the Bessel-3 bridge from r1 to r2 by inversion.
      const double u = rng.uniform();
      const double reach = -std::expm1(-2.0 * r1 * r2 / h);
      const double c = -0.5 * h * std::log1p(-u * reach);
      const double m = 0.5 * ((r1 + r2) - std::sqrt((r1 - r2) * (r1 - r2) + 4.0 * c));
      if (m < lowest) {
        lowest = m;
        at = k;
      }
      r1 = r2;
    }
    out.minima[r] = std::max(0.0, lowest);
    late[r] = at + 1 == steps.size();
  });

  const MeanEstimate mean = estimate_mean(out.minima);
  out.mean = mean.mean;
  out.stderr_ = mean.stderr_;
  out.ks_statistic = ks_statistic(out.minima, [x](double v) { return std::clamp(v / x, 0.0, 1.0); });
  out.ks_pvalue = ks_pvalue(out.ks_statistic, paths);
  out.late_fraction = static_cast<double>(std::count(late.begin(), late.end(), 1)) / static_cast<double>(paths);
  out.horizon_warning = out.late_fraction > 0.01;
  return out;
}

BesselMarginalResult bessel_marginal_check(double t, std::size_t samples, std::uint64_t seed, int bins,
                                           unsigned workers) {
  if (!(t > 0.0)) throw ValidationError("Bessel marginal check needs t > 0");
  if (bins < 2 || samples < static_cast<std::size_t>(5 * bins)) {
    throw ValidationError("Bessel marginal check needs at least 2 bins and 5 samples per bin");
  }
  std::vector<double> values(samples);
  const PathConfig config{t, t, false};
  parallel_for(samples, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, 0);
    values[r] = simulate_bessel3(config, 0.0, rng).back();
  });

  // R_t^2 / t is chi-square with 3 degrees of freedom.
  const boost::math::chi_squared_distribution<double> law(3.0);
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) edges.push_back(std::sqrt(t * boost::math::quantile(law, double(k) / bins)));
  std::vector<double> counts(bins, 0.0);
  for (double v : values) ++counts[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()];
  const double expected = static_cast<double>(samples) / bins;
  double chi = 0.0;
  for (double c : counts) chi += (c - expected) * (c - expected) / expected;

  BesselMarginalResult out;
  out.chi_square = chi;
  out.dof = bins - 1;
  out.pvalue = chi_square_pvalue(chi, out.dof);
  const MeanEstimate mean = estimate_mean(values);
  out.mean = mean.mean;
  out.stderr_ = mean.stderr_;
  return out;
}

}  // namespace logcorr
