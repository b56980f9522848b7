#include "logcorr/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logcorr/errors.hpp"
#include "logcorr/parallel.hpp"
#include "logcorr/stats.hpp"

namespace logcorr {

namespace {
constexpr double kTimeTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double centering(double t, int d) {
  if (!(t > 0.0)) throw ValidationError("centering needs t > 0");
  if (d < 1) throw ValidationError("dimension must be positive");
  return -(3.0 / (2.0 * std::sqrt(2.0 * d))) * std::log(t);
}

std::span<const double> FieldHistory::at(std::size_t step) const {
  return {values.data() + step * sites, sites};
}

std::size_t FieldHistory::step_near(double t, double tol) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
  if (it == times.end() || std::abs(*it - t) > tol) {
    throw ValidationError("no recorded step near t = " + std::to_string(t));
  }
  return static_cast<std::size_t>(it - times.begin());
}

FieldHistory record_history(const FieldSampler& sampler, double t_final, std::uint64_t seed,
                            std::uint64_t replica) {
  if (!(t_final >= 0.0)) throw ValidationError("t_final must be nonnegative");
  FieldHistory h;
  h.sites = sampler.grid().size();
  FieldState state = sampler.initial_state(seed, replica);
  h.times.push_back(0.0);
  h.values = state.values;
  const double delta = sampler.delta();
  while (state.t < t_final - kTimeTol) {
    const double next = std::min((std::floor(state.t / delta + kTimeTol) + 1.0) * delta, t_final);
    sampler.advance_to(state, next);
    h.times.push_back(state.t);
    h.values.insert(h.values.end(), state.values.begin(), state.values.end());
  }
  return h;
}

std::vector<std::size_t> sites_in(const GridSpec& grid, const Box& region) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.site(k);
    bool inside = true;
    for (int i = 0; i < grid.d; ++i) {
      inside = inside && x[i] >= region.lo[i] - kTimeTol && x[i] <= region.hi[i] + kTimeTol;
    }
    if (inside) out.push_back(k);
  }
  return out;
}

MaxRecord max_record(const FieldHistory& history, const GridSpec& grid, std::span<const std::size_t> sites,
                     std::size_t step, std::uint64_t replica) {
  if (sites.empty()) throw ValidationError("region contains no grid site");
  if (step >= history.times.size()) throw ValidationError("step beyond the recorded history");
  const auto field = history.at(step);
  MaxRecord r;
  r.replica = replica;
  r.t = history.times[step];
  r.max = -kInf;
  for (std::size_t s : sites) {
    if (field[s] > r.max) {
      r.max = field[s];
      r.argmax = s;
    }
  }
  r.site = grid.site(r.argmax);
  r.path.times.assign(history.times.begin(), history.times.begin() + static_cast<std::ptrdiff_t>(step + 1));
  r.path.values.resize(step + 1);
  r.running_max = -kInf;
  r.late_max = -kInf;
  for (std::size_t i = 0; i <= step; ++i) {
    const double v = history.values[i * history.sites + r.argmax];
    r.path.values[i] = v;
    r.running_max = std::max(r.running_max, v);
    if (history.times[i] >= 0.5 * r.t - kTimeTol) r.late_max = std::max(r.late_max, v);
  }
  r.terminal = r.path.values.back();
  return r;
}

std::vector<MaxRecord> record_maxima(const FieldSampler& sampler, const Box& region,
                                     std::span<const double> checkpoints, std::size_t replicas,
                                     std::uint64_t seed, unsigned workers) {
  if (checkpoints.empty()) throw ValidationError("at least one checkpoint is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 0.0) || (i > 0 && !(checkpoints[i] > checkpoints[i - 1]))) {
      throw ValidationError("checkpoints must be positive and increasing");
    }
  }
  const GridSpec& grid = sampler.grid();
  region_weights(grid, region);
  const auto sites = sites_in(grid, region);
  if (sites.empty()) throw ValidationError("region contains no grid site");
  sampler.prepare(checkpoints.back());

  const std::size_t nc = checkpoints.size();
  std::vector<MaxRecord> out(replicas * nc);
  parallel_for(replicas, workers, [&](std::size_t r) {
    const FieldHistory h = record_history(sampler, checkpoints.back(), seed, r);
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t step = h.step_near(checkpoints[c], 1e-6);
      MaxRecord rec = max_record(h, grid, sites, step, r);
      attach_neighbourhood(rec.path, h, grid, rec.argmax, rec.t, sampler.delta());
      out[r * nc + c] = std::move(rec);
    }
  });
  return out;
}

double MaxStatistics::median() const { return quantile_sorted(sorted, 0.5); }

MaxStatistics max_statistics(std::span<const double> centered, std::size_t bins) {
  if (centered.empty()) throw ValidationError("max statistics need at least one sample");
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  MaxStatistics s;
  s.sorted.assign(centered.begin(), centered.end());
  std::sort(s.sorted.begin(), s.sorted.end());
  s.probabilities = {0.05, 0.25, 0.5, 0.75, 0.95};
  for (double p : s.probabilities) s.quantiles.push_back(quantile_sorted(s.sorted, p));

  const double lo = s.sorted.front(), hi = s.sorted.back();
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  s.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) s.edges[i] = lo + width * static_cast<double>(i);
  s.counts.assign(bins, 0);
  for (double v : s.sorted) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++s.counts[std::min(b, bins - 1)];
  }
  return s;
}

MaxStatistics max_statistics(std::span<const MaxRecord> records, int d, std::size_t bins) {
  if (records.empty()) throw ValidationError("max statistics need at least one sample");
  std::vector<double> centered;
  centered.reserve(records.size());
  for (const auto& r : records) centered.push_back(r.max - centering(r.t, d));
  return max_statistics(centered, bins);
}

bool TailEstimate::all_censored() const {
  return std::all_of(points.begin(), points.end(), [](const TailPoint& p) { return p.censored; });
}

namespace {

void check_rhos(std::span<const double> rhos) {
  if (rhos.empty()) throw ValidationError("rho grid is empty");
  for (double r : rhos) {
    if (!(r >= 1.0) || !std::isfinite(r)) throw ValidationError("rho values must be finite and >= 1");
  }
}

void finish_tail(TailEstimate& est, int d) {
  double lo = kInf, hi = -kInf;
  for (auto& p : est.points) {
    p.ratio = std::exp(std::sqrt(2.0 * d) * p.rho) * p.p_hat / p.rho;
    if (!p.censored) {
      lo = std::min(lo, p.ratio);
      hi = std::max(hi, p.ratio);
    }
  }
  est.flatness = lo < kInf ? hi / lo : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

TailEstimate tail_ratio(std::span<const double> maxima, double t, int d, std::span<const double> rhos) {
  check_rhos(rhos);
  if (maxima.empty()) throw ValidationError("tail ratio needs at least one sample");
  const double a = centering(t, d);
  const double n = static_cast<double>(maxima.size());
  TailEstimate est;
  est.t = t;
  est.n = maxima.size();
  for (double rho : rhos) {
    const auto hits = std::count_if(maxima.begin(), maxima.end(), [&](double m) { return m >= a + rho; });
    TailPoint p;
    p.rho = rho;
    p.p_hat = static_cast<double>(hits) / n;
    if (hits == 0) {
      // Rule-of-three style upper bound for the censored point.
      p.censored = true;
      p.stderr_ = 3.0 / n;
    } else {
      p.stderr_ = std::sqrt(p.p_hat * (1.0 - p.p_hat) / n);
    }
    est.points.push_back(p);
  }
  finish_tail(est, d);
  return est;
}

TailEstimate tail_ratio_conditional(const FieldSampler& sampler, double t, std::span<const double> rhos,
                                    std::size_t replicas, std::uint64_t seed, unsigned workers) {
  check_rhos(rhos);
  if (!(t > 0.0)) throw ValidationError("tail ratio needs t > 0");
  if (replicas == 0) throw ValidationError("tail ratio needs at least one replica");
  const int d = sampler.grid().d;
  const double a = centering(t, d);
  const double root = std::sqrt(2.0 * d);
  // First schedule time at or after the crossover.
  const double delta = sampler.delta();
  const double stop = std::min(t, std::ceil(sampler.crossover() / delta - kTimeTol) * delta);
  sampler.prepare(stop);

  const std::size_t nr = rhos.size();
  std::vector<double> samples(replicas * nr);
  parallel_for(replicas, workers, [&](std::size_t r) {
    FieldState state = sampler.initial_state(seed, r);
    sampler.advance_to(state, stop);
    const double rest = t - state.t;
    for (std::size_t j = 0; j < nr; ++j) {
      const double threshold = a + rhos[j];
      double log_miss = 0.0;
      for (double y : state.values) {
        double q;
        if (rest <= kTimeTol) {
          q = y >= threshold ? 1.0 : 0.0;
        } else {
          const double z = (threshold - y + root * rest) / std::sqrt(rest);
          q = 0.5 * std::erfc(z / std::sqrt(2.0));
        }
        if (q >= 1.0) {
          log_miss = -kInf;
          break;
        }
        log_miss += std::log1p(-q);
      }
      samples[r * nr + j] = -std::expm1(log_miss);
    }
  });

  TailEstimate est;
  est.t = t;
  est.n = replicas;
  for (std::size_t j = 0; j < nr; ++j) {
    RunningStats stats;
    for (std::size_t r = 0; r < replicas; ++r) stats.add(samples[r * nr + j]);
    TailPoint p;
    p.rho = rhos[j];
    p.p_hat = stats.mean();
    p.stderr_ = stats.standard_error();
    p.censored = !(p.p_hat > 0.0);
    est.points.push_back(p);
  }
  finish_tail(est, d);
  return est;
}

PathEvent parse_path_event(const std::string& name) {
  if (name == "right_triangle") return PathEvent::RightTriangle;
  if (name == "closed_right_triangle") return PathEvent::ClosedRightTriangle;
  if (name == "good_particle") return PathEvent::GoodParticle;
  throw ValidationError("unknown path event '" + name + "'");
}

std::string to_string(PathEvent event) {
  switch (event) {
    case PathEvent::RightTriangle: return "right_triangle";
    case PathEvent::ClosedRightTriangle: return "closed_right_triangle";
    case PathEvent::GoodParticle: return "good_particle";
  }
  return "unknown";
}

void PathEventSpec::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("path event needs finite t > 0");
  if (!std::isfinite(alpha) || !std::isfinite(L)) throw ValidationError("path event parameters must be finite");
  if (d < 1 || d > 2) throw ValidationError("path event dimension must be 1 or 2");
  if (variant == PathEvent::GoodParticle) {
    if (!(l >= 1.0) || !std::isfinite(l) || !std::isfinite(D) || !std::isfinite(rho)) {
      throw ValidationError("good particle needs finite l >= 1, D and rho");
    }
  }
}

double envelope(double s, double t) {
  if (!(s >= 0.0) || s > t) throw ValidationError("envelope needs 0 <= s <= t");
  return s <= 0.5 * t ? std::pow(s, 1.0 / 12.0) : std::pow(t - s, 1.0 / 12.0);
}

double barrier_value(int i, double l, double t, double L, double D, double rho, int d) {
  if (i < 1 || static_cast<double>(i) > t) throw ValidationError("barrier index must satisfy 1 <= i <= t");
  const double log_l = std::log(l);
  if (i <= 5 * static_cast<int>(std::floor(log_l)) - 1) return std::pow(log_l, 2.0 / 3.0);
  const double e = envelope(i, t);
  if (i <= static_cast<int>(std::floor(0.5 * t)) - 1) return rho - 4.0 * e + D;
  return centering(t, d) + rho + L - 4.0 * e + D;
}

bool classify_path_event(const PathRecord& path, const PathEventSpec& spec) {
  spec.validate();
  const auto& times = path.times;
  if (times.empty() || times.size() != path.values.size()) throw ValidationError("path record is malformed");
  if (times.front() > kTimeTol || times.back() < spec.t - 1e-6) {
    throw ValidationError("path checkpoints do not cover [0, t]");
  }
  const double a = centering(spec.t, spec.d);
  double running = -kInf, late = -kInf, terminal = path.values.front();
  for (std::size_t i = 0; i < times.size() && times[i] <= spec.t + 1e-6; ++i) {
    running = std::max(running, path.values[i]);
    if (times[i] >= 0.5 * spec.t - kTimeTol) late = std::max(late, path.values[i]);
    terminal = path.values[i];
  }
  const double relax = spec.variant == PathEvent::ClosedRightTriangle ? 1.0 : 0.0;
  const bool triangle = running <= spec.alpha + relax && late <= a + spec.alpha + spec.L + relax &&
                        terminal >= a + spec.alpha - 1.0 - relax;
  if (spec.variant != PathEvent::GoodParticle || !triangle) return triangle;

  const auto top = static_cast<std::size_t>(std::floor(spec.t + kTimeTol));
  if (path.oscillation.size() < top || path.integer_values.size() < top) {
    throw ValidationError("good particle test needs neighbourhood data at every integer time");
  }
  for (std::size_t k = 1; k <= top; ++k) {
    const double e = envelope(static_cast<double>(k), spec.t);
    if (path.oscillation[k - 1] > e + 0.5 * spec.D) return false;
    const double level = barrier_value(static_cast<int>(k), spec.l, spec.t, spec.L, spec.D, spec.rho, spec.d);
    if (path.integer_values[k - 1] > level) return false;
  }
  return true;
}

void attach_neighbourhood(PathRecord& path, const FieldHistory& history, const GridSpec& grid, std::size_t x,
                          double t, double delta) {
  const auto top = static_cast<std::size_t>(std::floor(t + kTimeTol));
  path.oscillation.assign(top, -kInf);
  path.integer_values.assign(top, 0.0);
  const Point px = grid.site(x);
  for (std::size_t k = 1; k <= top; ++k) {
    const std::size_t step = history.step_near(static_cast<double>(k), 0.5 * delta + kTimeTol);
    const auto field = history.at(step);
    path.integer_values[k - 1] = field[x];
    // A_1 is everything outside B(x, 1); A_k for k >= 2 is the annulus e^{1-k} <= |y - x| < e^{2-k}.
    const double inner = k == 1 ? 1.0 : std::exp(1.0 - static_cast<double>(k));
    const double outer = k == 1 ? kInf : std::exp(2.0 - static_cast<double>(k));
    double osc = -kInf;
    for (std::size_t y = 0; y < grid.size(); ++y) {
      const Point py = grid.site(y);
      const double r = sup_norm({py[0] - px[0], py[1] - px[1]}, grid.d);
      if (r >= inner && r < outer) osc = std::max(osc, std::abs(field[x] - field[y]));
    }
    path.oscillation[k - 1] = osc;
  }
}

namespace {

double objective(double log_c, std::span<const double> z, std::span<const double> empirical,
                 std::span<const double> m, double root, std::vector<double>* model) {
  const double c = std::exp(log_c);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double scale = c * std::exp(root * z[i]);
    CompensatedSum sum;
    for (double v : m) sum.add(std::exp(-scale * v));
    const double f = sum.value() / static_cast<double>(m.size());
    if (model) (*model)[i] = f;
    s += (empirical[i] - f) * (empirical[i] - f);
  }
  return s;
}

}  // namespace

GumbelFit fit_limit_law(std::span<const double> centered_max, std::span<const double> mprime,
                        std::span<const double> z_grid, int d) {
  if (centered_max.empty() || mprime.empty()) throw ValidationError("limit-law fit needs both sample sets");
  if (z_grid.empty()) throw ValidationError("limit-law fit needs a z grid");
  const double root = std::sqrt(2.0 * d);
  std::vector<double> m(mprime.begin(), mprime.end());
  for (double& v : m) v = std::max(v, 0.0);

  GumbelFit fit;
  fit.z.assign(z_grid.begin(), z_grid.end());
  fit.n_max = centered_max.size();
  fit.n_mprime = mprime.size();
  fit.empirical_cdf.resize(z_grid.size());
  fit.model_cdf.resize(z_grid.size());
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    const auto hits = std::count_if(centered_max.begin(), centered_max.end(),
                                     [&](double w) { return w <= -z_grid[i]; });
    fit.empirical_cdf[i] = static_cast<double>(hits) / static_cast<double>(centered_max.size());
  }

  const double lo = -20.0, hi = 20.0, step = 0.25;
  const auto f = [&](double x) { return objective(x, fit.z, fit.empirical_cdf, m, root, nullptr); };
  const int count = static_cast<int>((hi - lo) / step);
  int best = 0;
  double best_value = kInf;
  for (int k = 0; k <= count; ++k) {
    const double v = f(lo + step * k);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  // A plateau reaching either end of the scan is not an interior minimum.
  if (best == 0 || best == count || f(lo) <= best_value || f(hi) <= best_value) {
    throw FitError("limit-law fit: minimum lies on the boundary of log C in [-20, 20]");
  }

  // Golden section on the bracket around the best scan point.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo + step * (best - 1), b = lo + step * (best + 1);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  if (b - a > 1e-6) throw FitError("limit-law fit: golden section did not converge");
  const double log_c = 0.5 * (a + b);
  fit.c_star = std::exp(log_c);
  fit.residual = std::sqrt(objective(log_c, fit.z, fit.empirical_cdf, m, root, &fit.model_cdf));
  return fit;
}

std::vector<double> synthetic_limit_law(std::span<const double> mprime, double c_star, int d, std::size_t count,
                                        std::uint64_t seed) {
  if (mprime.empty()) throw ValidationError("synthetic limit law needs M' samples");
  if (!(c_star > 0.0)) throw ValidationError("synthetic limit law needs C* > 0");
  const double root = std::sqrt(2.0 * d);
  RandomStream rng(seed, 0, 0);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double m = mprime[i % mprime.size()];
    const double u = rng.uniform();
    if (!(m > 0.0)) {
      out[i] = -kInf;
      continue;
    }
    const double z = std::log(-std::log(u) / (c_star * m)) / root;
    out[i] = -z;
  }
  return out;
}

}  // namespace logcorr
