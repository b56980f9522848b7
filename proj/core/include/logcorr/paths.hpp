#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "logcorr/rng.hpp"

namespace logcorr {

struct PathConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  bool crossing_correction = true;

  void validate() const;
  /// 0, dt, 2 dt, ..., horizon (last step shortened).
  std::vector<double> times() const;
};

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  bool censored = false;
};

McEstimate summarize(std::span<const double> samples);

/// P_{-x}(max_{[0,t]} B <= 0) = 2 Phi(x / sqrt t) - 1.
double ballot_exact(double x, double t);

/// P_{-z}(B_t in [-b, -a], max_{[0,t]} B <= 0) from the density killed at 0.
double box_ballot_exact(double z, double a, double b, double t);

std::vector<double> simulate_bm(const PathConfig& config, double start, RandomStream& rng);
/// Norm of a three-dimensional Brownian motion started at (start, 0, 0).
std::vector<double> simulate_bessel3(const PathConfig& config, double start, RandomStream& rng);

/// P(max of the Brownian bridge from x1 to x2 over time h stays <= u).
double bridge_stay_below(double x1, double x2, double u, double h) noexcept;

/// lo <= sup_{[t0, t1]} f <= hi.
struct SupConstraint {
  double t0 = 0.0;
  double t1 = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// lo <= f(t) <= hi.
struct PointConstraint {
  double t = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct BarrierEvent {
  std::string name;
  double horizon = 1.0;
  double start = 0.0;
  std::vector<SupConstraint> sups;
  std::vector<PointConstraint> points;

  void validate() const;
};

/// Barrier sets with I_t(z) = [a_t + z - 1, a_t + z].
BarrierEvent right_triangle_event(double alpha, double L, double t, int d, double start = 0.0);
BarrierEvent closed_right_triangle_event(double alpha, double L, double t, int d, double start = 0.0);
BarrierEvent black_up_event(double t, double a, double z, double L, double l, int d, double start = 0.0);
BarrierEvent black_down_event(double t, double a, double z, double L, double l, int d, double start = 0.0);
BarrierEvent diamond_event(double t, double l, double alpha, double L, double m, int d, double start = 0.0);

/// Per-path weight: probability of the event given the grid values, with
/// exact bridge crossing probabilities on each barrier step when the
/// correction is on, and grid indicators otherwise.
class BarrierEventEvaluator {
 public:
  BarrierEventEvaluator(BarrierEvent event, const PathConfig& config);

  const std::vector<double>& times() const noexcept { return times_; }
  double weight(std::span<const double> path) const;

 private:
  struct Group {
    std::size_t first = 0, last = 0;  // steps [first, last)
    double lo = 0.0;
  };
  BarrierEvent event_;
  bool correction_;
  std::vector<double> times_;
  std::vector<double> upper_;  // per step
  std::vector<Group> groups_;
  std::vector<int> group_of_;  // per step, -1 if none
  std::vector<std::pair<std::size_t, PointConstraint>> points_;
};

McEstimate event_probability_mc(const BarrierEvent& event, const PathConfig& config, std::size_t paths,
                                std::uint64_t seed, unsigned workers = 1);

/// Ballot MC on shared paths: result[i * ts.size() + j] estimates
/// P_{-xs[i]}(max_{[0, ts[j]]} B <= 0).
std::vector<McEstimate> ballot_mc(std::span<const double> xs, std::span<const double> ts, const PathConfig& config,
                                  std::size_t paths, std::uint64_t seed, unsigned workers = 1);

using PathFunctional = std::function<double(std::span<const double> path)>;

struct GirsanovResult {
  McEstimate direct;
  McEstimate tilted;
};

/// E f(Y) for Y_s = B_s - sqrt(2d) s, directly and as E[f(W) e^{-sqrt(2d) W_t - d t}]
/// with W a driftless Brownian motion.
GirsanovResult girsanov_check(const PathConfig& config, int d, const PathFunctional& f, std::size_t paths,
                              std::uint64_t seed, unsigned workers = 1);

struct WilliamsResult {
  std::vector<double> minima;
  double mean = 0.0;
  double stderr_ = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  double late_fraction = 0.0;
  bool horizon_warning = false;
};

/// Global minimum of a Bessel-3 process from x, on a geometric step grid with
/// the exact Bessel-bridge minimum inside each step.
WilliamsResult williams_minimum_check(double x, std::size_t paths, std::uint64_t seed, unsigned workers = 1,
                                      double horizon_factor = 1e8);

struct BesselMarginalResult {
  double chi_square = 0.0;
  double dof = 0.0;
  double pvalue = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Chi-square of R_t over equiprobable bins of sqrt(2/(pi t^3)) x^2 e^{-x^2/(2t)}.
BesselMarginalResult bessel_marginal_check(double t, std::size_t samples, std::uint64_t seed, int bins = 30,
                                           unsigned workers = 1);

}  // namespace logcorr
