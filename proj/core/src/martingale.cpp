#include "logcorr/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logcorr/errors.hpp"
#include "logcorr/parallel.hpp"
#include "logcorr/stats.hpp"

namespace logcorr {

bool Box::empty(int d) const noexcept {
  for (int i = 0; i < d; ++i) {
    if (!(hi[i] > lo[i])) return true;
  }
  return false;
}

double Box::volume(int d) const noexcept {
  if (empty(d)) return 0.0;
  double v = 1.0;
  for (int i = 0; i < d; ++i) v *= hi[i] - lo[i];
  return v;
}

std::vector<double> region_weights(const GridSpec& grid, const Box& region) {
  grid.validate();
  const int d = grid.d;
  for (int i = 0; i < d; ++i) {
    if (region.lo[i] < 0.0 || region.hi[i] > grid.R || region.lo[i] > region.hi[i]) {
      throw ValidationError("region lies outside the grid domain [0, R]^d");
    }
  }
  std::vector<double> weights(grid.size(), 0.0);
  if (region.empty(d)) return weights;

  // Per-axis overlap of each site's cell with [lo, hi].
  const double h = grid.spacing();
  std::array<std::vector<double>, 2> axis;
  for (int i = 0; i < d; ++i) {
    axis[i].resize(grid.n);
    for (int j = 0; j < grid.n; ++j) {
      double a = grid.n > 1 ? j * h - 0.5 * h : 0.0;
      double b = grid.n > 1 ? j * h + 0.5 * h : grid.R;
      a = std::max({a, 0.0, region.lo[i]});
      b = std::min({b, grid.R, region.hi[i]});
      axis[i][j] = std::max(0.0, b - a);
    }
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto ij = grid.indices(k);
    weights[k] = axis[0][ij[0]] * (d == 2 ? axis[1][ij[1]] : 1.0);
  }
  return weights;
}

namespace {

void check_sizes(const FieldState& state, const GridSpec& grid, std::span<const double> weights) {
  if (state.values.size() != grid.size() || weights.size() != grid.size()) {
    throw ValidationError("field state, grid and region weights disagree in size");
  }
}

}  // namespace

double additive_measure(const FieldState& state, const GridSpec& grid, double gamma,
                        std::span<const double> weights) {
  check_sizes(state, grid, weights);
  if (!std::isfinite(gamma)) throw ValidationError("gamma must be finite");
  const double shift = gamma * std::sqrt(2.0 * grid.d) * state.t - 0.5 * gamma * gamma * state.t;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) top = std::max(top, gamma * state.values[i] + shift + std::log(weights[i]));
  }
  if (!std::isfinite(top)) return 0.0;
  CompensatedSum sum;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) sum.add(std::exp(gamma * state.values[i] + shift + std::log(weights[i]) - top));
  }
  return std::exp(top) * sum.value();
}

double additive_measure(const FieldState& state, const GridSpec& grid, double gamma, const Box& region) {
  return additive_measure(state, grid, gamma, region_weights(grid, region));
}

double derivative_measure(const FieldState& state, const GridSpec& grid, std::span<const double> weights) {
  check_sizes(state, grid, weights);
  const double root = std::sqrt(2.0 * grid.d);
  const double shift = grid.d * state.t;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) top = std::max(top, root * state.values[i] + shift + std::log(weights[i]));
  }
  if (!std::isfinite(top)) return 0.0;
  CompensatedSum sum;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      sum.add(-state.values[i] * std::exp(root * state.values[i] + shift + std::log(weights[i]) - top));
    }
  }
  return std::exp(top) * sum.value();
}

double derivative_measure(const FieldState& state, const GridSpec& grid, const Box& region) {
  return derivative_measure(state, grid, region_weights(grid, region));
}

void MeasureRequest::validate(const GridSpec& grid) const {
  for (double g : gammas) {
    if (!std::isfinite(g) || g < 0.0) throw ValidationError("gamma values must be finite and >= 0");
  }
  if (checkpoints.empty()) throw ValidationError("at least one checkpoint is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] >= 0.0) || (i > 0 && !(checkpoints[i] > checkpoints[i - 1]))) {
      throw ValidationError("checkpoints must be nonnegative and increasing");
    }
  }
  region_weights(grid, region);
}

double MartingaleSeries::additive_at(std::size_t replica, std::size_t checkpoint, std::size_t gamma) const {
  return additive[(replica * checkpoints.size() + checkpoint) * gammas.size() + gamma];
}

double MartingaleSeries::derivative_at(std::size_t replica, std::size_t checkpoint) const {
  return derivative[replica * checkpoints.size() + checkpoint];
}

MartingaleSeries martingale_trajectory(const FieldSampler& sampler, const MeasureRequest& request,
                                       std::size_t replicas, std::uint64_t seed, unsigned workers) {
  const GridSpec& grid = sampler.grid();
  request.validate(grid);
  const auto weights = region_weights(grid, request.region);
  sampler.prepare(request.checkpoints.back());

  MartingaleSeries out;
  out.gammas = request.gammas;
  out.checkpoints = request.checkpoints;
  out.replicas = replicas;
  const std::size_t nc = request.checkpoints.size(), ng = request.gammas.size();
  out.additive.resize(replicas * nc * ng);
  out.derivative.resize(replicas * nc);

  parallel_for(replicas, workers, [&](std::size_t r) {
    FieldState state = sampler.initial_state(seed, r);
    for (std::size_t c = 0; c < nc; ++c) {
      sampler.advance_to(state, request.checkpoints[c]);
      for (std::size_t g = 0; g < ng; ++g) {
        out.additive[(r * nc + c) * ng + g] = additive_measure(state, grid, request.gammas[g], weights);
      }
      out.derivative[r * nc + c] = derivative_measure(state, grid, weights);
    }
  });
  return out;
}

}  // namespace logcorr
