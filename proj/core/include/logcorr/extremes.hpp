#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "logcorr/martingale.hpp"
#include "logcorr/sampler.hpp"

namespace logcorr {

/// a_t = -(3 / (2 sqrt(2d))) log t.
double centering(double t, int d);

/// Every step of one replica, sites x times (row per step).
struct FieldHistory {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t sites = 0;

  std::span<const double> at(std::size_t step) const;
  /// Index of the step time nearest to t; throws if none lies within tol.
  std::size_t step_near(double t, double tol) const;
};

FieldHistory record_history(const FieldSampler& sampler, double t_final, std::uint64_t seed,
                            std::uint64_t replica);

/// Discrete trajectory of one site, plus the neighbourhood data the
/// good-particle test reads at integer times k = 1, ..., floor(t).
struct PathRecord {
  std::vector<double> times;
  std::vector<double> values;
  /// sup over A_k(x) of |Y_k(x) - Y_k(y)|; -inf when A_k(x) holds no grid site.
  std::vector<double> oscillation;
  std::vector<double> integer_values;
};

struct MaxRecord {
  std::uint64_t replica = 0;
  double t = 0.0;
  double max = 0.0;
  std::size_t argmax = 0;
  Point site{};
  double running_max = 0.0;  // over [0, t]
  double late_max = 0.0;     // over [t/2, t]
  double terminal = 0.0;
  PathRecord path;
};

/// Sites of the grid inside the closed box.
std::vector<std::size_t> sites_in(const GridSpec& grid, const Box& region);

/// Max over `sites` of the field at step `step` of the history, with the
/// argmax path up to that step.
MaxRecord max_record(const FieldHistory& history, const GridSpec& grid, std::span<const std::size_t> sites,
                     std::size_t step, std::uint64_t replica);

/// Records at each checkpoint; result is replica-major.
std::vector<MaxRecord> record_maxima(const FieldSampler& sampler, const Box& region,
                                     std::span<const double> checkpoints, std::size_t replicas,
                                     std::uint64_t seed, unsigned workers = 1);

struct MaxStatistics {
  std::vector<double> sorted;
  std::vector<double> probabilities;
  std::vector<double> quantiles;
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;

  double median() const;
};

MaxStatistics max_statistics(std::span<const double> centered, std::size_t bins = 40);
MaxStatistics max_statistics(std::span<const MaxRecord> records, int d, std::size_t bins = 40);

struct TailPoint {
  double rho = 0.0;
  double p_hat = 0.0;
  double stderr_ = 0.0;
  double ratio = 0.0;
  bool censored = false;
};

struct TailEstimate {
  double t = 0.0;
  std::size_t n = 0;
  std::vector<TailPoint> points;
  /// max/min ratio over uncensored points; NaN when none is uncensored.
  double flatness = 0.0;

  bool all_censored() const;
};

/// Binomial estimate of P(M_t >= a_t + rho) from raw grid maxima.
TailEstimate tail_ratio(std::span<const double> maxima, double t, int d, std::span<const double> rhos);

/// Conditional estimate: each replica is run to the first schedule time at or
/// after the crossover, after which sites evolve independently; the exceedance
/// probability is then averaged in closed form over the remaining Gaussian step.
TailEstimate tail_ratio_conditional(const FieldSampler& sampler, double t, std::span<const double> rhos,
                                    std::size_t replicas, std::uint64_t seed, unsigned workers = 1);

enum class PathEvent { RightTriangle, ClosedRightTriangle, GoodParticle };

PathEvent parse_path_event(const std::string& name);
std::string to_string(PathEvent event);

struct PathEventSpec {
  PathEvent variant = PathEvent::RightTriangle;
  double alpha = 0.0;
  double L = 0.0;
  double t = 1.0;
  int d = 1;
  // GoodParticle only.
  double l = 1.0;
  double D = 0.0;
  double rho = 0.0;

  void validate() const;
};

/// e_s = s^{1/12} for s <= t/2 and (t - s)^{1/12} after.
double envelope(double s, double t);

/// d^L_{i,l}(rho).
double barrier_value(int i, double l, double t, double L, double D, double rho, int d);

bool classify_path_event(const PathRecord& path, const PathEventSpec& spec);

/// Oscillations and values at integer times for the site `x`, from a history.
void attach_neighbourhood(PathRecord& path, const FieldHistory& history, const GridSpec& grid, std::size_t x,
                          double t, double delta);

struct GumbelFit {
  double c_star = 0.0;
  double residual = 0.0;
  std::vector<double> z;
  std::vector<double> empirical_cdf;
  std::vector<double> model_cdf;
  std::size_t n_max = 0;
  std::size_t n_mprime = 0;
};

/// Least-squares fit of P(W <= -z) = E exp(-C e^{sqrt(2d) z} M') over log C.
/// Negative M' samples enter as 0.
GumbelFit fit_limit_law(std::span<const double> centered_max, std::span<const double> mprime,
                        std::span<const double> z_grid, int d);

/// Draws W = -z with P(W <= -z | M' = m) = exp(-C e^{sqrt(2d) z} m), cycling
/// through the M' samples; m <= 0 yields -inf.
std::vector<double> synthetic_limit_law(std::span<const double> mprime, double c_star, int d, std::size_t count,
                                        std::uint64_t seed);

}  // namespace logcorr
