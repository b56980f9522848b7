#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "logcorr/sampler.hpp"

namespace logcorr {

/// Axis-aligned box [lo, hi] inside [0, R]^d.
struct Box {
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  bool empty(int d) const noexcept;
  double volume(int d) const noexcept;
};

/// Cell weights of A on the grid: each site owns the cell of side `spacing`
/// centred on it (clipped to [0, R]^d), and its weight is the Lebesgue measure
/// of cell ∩ A. Weights sum to λ(A). Throws if A leaves [0, R]^d.
std::vector<double> region_weights(const GridSpec& grid, const Box& region);

/// M^γ_t(A) = ∫_A exp(γY + γ sqrt(2d) t - γ² t / 2) dx as a weighted sum,
/// accumulated in log space.
double additive_measure(const FieldState& state, const GridSpec& grid, double gamma,
                        std::span<const double> weights);
double additive_measure(const FieldState& state, const GridSpec& grid, double gamma, const Box& region);

/// M'_t(A) = ∫_A (-Y) exp(sqrt(2d) Y + d t) dx.
double derivative_measure(const FieldState& state, const GridSpec& grid, std::span<const double> weights);
double derivative_measure(const FieldState& state, const GridSpec& grid, const Box& region);

struct MeasureRequest {
  std::vector<double> gammas;
  Box region;
  std::vector<double> checkpoints;

  void validate(const GridSpec& grid) const;
};

/// Flat storage: additive[(replica * checkpoints + c) * gammas + g],
/// derivative[replica * checkpoints + c].
struct MartingaleSeries {
  std::vector<double> gammas;
  std::vector<double> checkpoints;
  std::size_t replicas = 0;
  std::vector<double> additive;
  std::vector<double> derivative;

  double additive_at(std::size_t replica, std::size_t checkpoint, std::size_t gamma) const;
  double derivative_at(std::size_t replica, std::size_t checkpoint) const;
};

MartingaleSeries martingale_trajectory(const FieldSampler& sampler, const MeasureRequest& request,
                                       std::size_t replicas, std::uint64_t seed, unsigned workers = 1);

}  // namespace logcorr
