#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "logcorr/kernel.hpp"
#include "logcorr/rng.hpp"

namespace logcorr {

/// Regular grid on [0, R]^d with n points per axis (row-major, last axis fastest).
struct GridSpec {
  int d = 1;
  double R = 1.0;
  int n = 64;
  int embedding_factor = 2;
  std::size_t max_points = std::size_t{1} << 22;

  void validate() const;
  /// R / (n - 1); a single-site grid reports R.
  double spacing() const noexcept;
  std::size_t size() const noexcept;
  Point site(std::size_t index) const noexcept;
  std::array<int, 2> indices(std::size_t index) const noexcept;
};

struct ScaleSchedule {
  double delta = 0.05;
  double t_final = 1.0;

  void validate() const;
  /// 0, delta, 2 delta, ..., with the last step shortened to land on t_final.
  std::vector<double> times() const;
};

/// Scale-time from which distinct grid sites have independent increments:
/// log(1/spacing), floored at 0. A single-site grid has crossover 0.
double crossover_time(const GridSpec& grid) noexcept;

struct FieldState {
  std::vector<double> values;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::uint32_t step = 0;  // RNG substream of the next increment
};

/// Square roots of the circulant eigenvalues of one increment covariance,
/// pre-divided by the embedded size so synthesis is c2r(spectrum * r2c(noise)).
struct CirculantSpectrum {
  int d = 1;
  int m = 0;  // embedded points per axis
  int embedding_factor = 2;
  double worst_eigenvalue = 0.0;
  std::vector<double> scaled_sqrt;  // length of the r2c half spectrum

  std::size_t embedded_size() const noexcept;
};

/// Spectrum of c(r) = cov_scale_integral(s, s + delta, r) on the periodically
/// embedded grid. Throws NegativeSpectrum below -1e-8 * delta.
CirculantSpectrum build_increment_covariance(const KernelSpec& kernel, const GridSpec& grid, double s,
                                             double delta, int embedding_factor);

/// Same, retrying once with embedding factor 4 if the first attempt fails.
CirculantSpectrum build_increment_covariance(const KernelSpec& kernel, const GridSpec& grid, double s,
                                             double delta);

/// Accumulates stationary Gaussian increments in scale-time. Spectra are built
/// once per (s, delta) and shared between threads; the draws of replica r at
/// step i come from RandomStream(seed, r, i) only.
class FieldSampler {
 public:
  FieldSampler(KernelSpec kernel, GridSpec grid, double delta = 0.05);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const GridSpec& grid() const noexcept { return grid_; }
  double delta() const noexcept { return delta_; }
  double crossover() const noexcept { return t_cross_; }

  /// Builds every spectrum the schedule up to t_final needs.
  void prepare(double t_final) const;

  FieldState initial_state(std::uint64_t seed, std::uint64_t replica) const;

  /// Adds one increment of length dt (any dt >= 0).
  void advance(FieldState& state, double dt) const;

  /// Advances with the default step until state.t reaches t (last step shortened).
  void advance_to(FieldState& state, double t) const;

  FieldState sample_field(double t_final, std::uint64_t seed, std::uint64_t replica = 0) const;

  /// Y_l and Y_{l+s} from one trajectory.
  std::pair<FieldState, FieldState> sample_increment_field(double l, double s, std::uint64_t seed,
                                                           std::uint64_t replica = 0) const;

 private:
  std::shared_ptr<const CirculantSpectrum> spectrum(double s, double dt) const;
  void synthesize(const CirculantSpectrum& spec, RandomStream& rng, std::span<double> out) const;

  KernelSpec kernel_;
  GridSpec grid_;
  double delta_;
  double t_cross_;
  double drift_rate_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const CirculantSpectrum>> cache_;
};

/// Drifted Brownian path of a single site at the given times, i.e. the law of
/// (Y_s(x))_s for any fixed x.
std::vector<double> sample_point_path(std::span<const double> times, int d, std::uint64_t seed,
                                      std::uint64_t replica);

/// Conditional decomposition Y(u) = P(u) + Z(u) - zeta(u) around an anchor x.
struct Decomposition {
  Point anchor{};
  std::vector<Point> targets;
  std::vector<double> P;
  std::vector<double> Z;
  std::vector<double> zeta;
  std::vector<double> Y;
};

/// Precomputes the anchored weights k(e^{s_i}(x - u)), the Z Gram factor and the
/// zeta values for a fixed anchor, target set and time grid.
class ConditionalDecomposer {
 public:
  ConditionalDecomposer(const KernelSpec& kernel, Point anchor, std::vector<Point> targets,
                        std::vector<double> times);

  /// anchor_path[i] is Y_{times[i]}(x); Z is drawn from RandomStream(seed, replica, ...).
  Decomposition decompose(std::span<const double> anchor_path, std::uint64_t seed,
                          std::uint64_t replica) const;

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  Point anchor_;
  std::vector<Point> targets_;
  std::vector<double> times_;
  std::vector<double> weights_;  // targets x steps, row-major
  std::vector<double> factor_;   // targets x targets, row-major
  std::vector<double> zeta_;
  double min_eigenvalue_ = 0.0;
};

Decomposition decompose_conditional(const KernelSpec& kernel, Point anchor,
                                    std::span<const double> times, std::span<const double> anchor_path,
                                    std::vector<Point> targets, std::uint64_t seed,
                                    std::uint64_t replica = 0);

/// Symmetric square-root-like factor A (row-major) with A A^T = G after clipping
/// eigenvalues in [-tol, 0) to zero. Throws PsdFailure below -tol.
std::vector<double> psd_factor(std::span<const double> gram, std::size_t size, double tol,
                               double* min_eigenvalue = nullptr);

}  // namespace logcorr
