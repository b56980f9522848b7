#include "logcorr/sampler.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

#include "logcorr/errors.hpp"

namespace logcorr {

namespace {

constexpr double kTimeEps = 1e-9;

struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

std::size_t half_spectrum_size(int d, int m) {
  const std::size_t half = static_cast<std::size_t>(m) / 2 + 1;
  return d == 1 ? half : static_cast<std::size_t>(m) * half;
}

std::size_t real_size(int d, int m) {
  return d == 1 ? static_cast<std::size_t>(m) : static_cast<std::size_t>(m) * m;
}

// Plans are created once per shape and reused through the new-array interface,
// which is safe to call concurrently on distinct arrays.
FftPlans plans_for(int d, int m) {
  static std::map<std::pair<int, int>, FftPlans> registry;
  std::lock_guard lock(fftw_mutex());
  auto& slot = registry[{d, m}];
  if (slot.forward == nullptr) {
    double* in = fftw_alloc_real(real_size(d, m));
    fftw_complex* out = fftw_alloc_complex(half_spectrum_size(d, m));
    if (d == 1) {
      slot.forward = fftw_plan_dft_r2c_1d(m, in, out, FFTW_ESTIMATE);
      slot.backward = fftw_plan_dft_c2r_1d(m, out, in, FFTW_ESTIMATE);
    } else {
      slot.forward = fftw_plan_dft_r2c_2d(m, m, in, out, FFTW_ESTIMATE);
      slot.backward = fftw_plan_dft_c2r_2d(m, m, out, in, FFTW_ESTIMATE);
    }
    fftw_free(in);
    fftw_free(out);
  }
  return slot;
}

struct Workspace {
  int d = 0;
  int m = 0;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;

  void ensure(int dim, int size) {
    if (dim == d && size == m) return;
    release();
    d = dim;
    m = size;
    real = fftw_alloc_real(real_size(d, m));
    spectrum = fftw_alloc_complex(half_spectrum_size(d, m));
  }
  void release() {
    if (real) fftw_free(real);
    if (spectrum) fftw_free(spectrum);
    real = nullptr;
    spectrum = nullptr;
  }
  ~Workspace() { release(); }
};

Workspace& thread_workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

void GridSpec::validate() const {
  if (d < 1 || d > 2) throw ValidationError("grid.d must be 1 or 2");
  if (!(R > 0.0)) throw ValidationError("grid.R must be positive");
  if (n < 1) throw ValidationError("grid.n must be at least 1");
  if (embedding_factor < 2) throw ValidationError("embedding factor must be at least 2");
  if (size() > max_points) {
    throw ValidationError("grid of " + std::to_string(size()) + " points exceeds the memory budget of " +
                          std::to_string(max_points));
  }
}

double GridSpec::spacing() const noexcept { return n > 1 ? R / (n - 1) : R; }

std::size_t GridSpec::size() const noexcept {
  const auto nn = static_cast<std::size_t>(n);
  return d == 1 ? nn : nn * nn;
}

std::array<int, 2> GridSpec::indices(std::size_t index) const noexcept {
  if (d == 1) return {static_cast<int>(index), 0};
  return {static_cast<int>(index / n), static_cast<int>(index % n)};
}

Point GridSpec::site(std::size_t index) const noexcept {
  const auto ij = indices(index);
  const double h = n > 1 ? spacing() : 0.0;
  return {ij[0] * h, d == 2 ? ij[1] * h : 0.0};
}

void ScaleSchedule::validate() const {
  if (!(delta > 0.0)) throw ValidationError("schedule.delta must be positive");
  if (!(t_final >= 0.0)) throw ValidationError("schedule.t_final must be nonnegative");
}

std::vector<double> ScaleSchedule::times() const {
  validate();
  std::vector<double> out{0.0};
  for (std::size_t k = 1;; ++k) {
    const double s = static_cast<double>(k) * delta;
    if (s >= t_final - kTimeEps) break;
    out.push_back(s);
  }
  if (t_final > 0.0) out.push_back(t_final);
  return out;
}

double crossover_time(const GridSpec& grid) noexcept {
  if (grid.n <= 1) return 0.0;
  return std::max(0.0, std::log(1.0 / grid.spacing()));
}

std::size_t CirculantSpectrum::embedded_size() const noexcept { return real_size(d, m); }

CirculantSpectrum build_increment_covariance(const KernelSpec& kernel, const GridSpec& grid, double s,
                                             double delta, int embedding_factor) {
  grid.validate();
  if (!(delta > 0.0)) throw ValidationError("increment length must be positive");
  if (grid.d != kernel.dimension()) throw ValidationError("grid and kernel dimensions differ");
  const int d = grid.d;
  const int m = embedding_factor * grid.n;
  const double h = grid.spacing();

  // Covariance of one lag index pair; the row only depends on folded lags.
  const int half = m / 2;
  std::vector<double> lag_cov(static_cast<std::size_t>(half + 1) * (d == 2 ? half + 1 : 1));
  if (d == 1) {
    for (int j = 0; j <= half; ++j) lag_cov[j] = cov_scale_integral(kernel, s, s + delta, {j * h, 0.0});
  } else {
    for (int a = 0; a <= half; ++a) {
      for (int b = a; b <= half; ++b) {
        const double c = cov_scale_integral(kernel, s, s + delta, {a * h, b * h});
        lag_cov[a * (half + 1) + b] = c;
        lag_cov[b * (half + 1) + a] = c;
      }
    }
  }

  const FftPlans plans = plans_for(d, m);
  double* row = fftw_alloc_real(real_size(d, m));
  fftw_complex* eig = fftw_alloc_complex(half_spectrum_size(d, m));
  auto fold = [m](int j) { return std::min(j, m - j); };
  if (d == 1) {
    for (int j = 0; j < m; ++j) row[j] = lag_cov[fold(j)];
  } else {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) row[a * m + b] = lag_cov[fold(a) * (half + 1) + fold(b)];
    }
  }
  fftw_execute_dft_r2c(plans.forward, row, eig);

  CirculantSpectrum out;
  out.d = d;
  out.m = m;
  out.embedding_factor = embedding_factor;
  const std::size_t count = half_spectrum_size(d, m);
  out.scaled_sqrt.resize(count);
  const double eps = 1e-8 * delta;
  const double inv_size = 1.0 / static_cast<double>(real_size(d, m));
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double lambda = eig[k][0];
    worst = std::min(worst, lambda);
    out.scaled_sqrt[k] = std::sqrt(std::max(lambda, 0.0)) * inv_size;
  }
  fftw_free(row);
  fftw_free(eig);
  out.worst_eigenvalue = worst;
  if (worst < -eps) throw NegativeSpectrum(worst);
  return out;
}

CirculantSpectrum build_increment_covariance(const KernelSpec& kernel, const GridSpec& grid, double s,
                                             double delta) {
  try {
    return build_increment_covariance(kernel, grid, s, delta, grid.embedding_factor);
  } catch (const NegativeSpectrum&) {
    if (grid.embedding_factor >= 4) throw;
    return build_increment_covariance(kernel, grid, s, delta, 4);
  }
}

FieldSampler::FieldSampler(KernelSpec kernel, GridSpec grid, double delta)
    : kernel_(std::move(kernel)), grid_(grid), delta_(delta) {
  grid_.validate();
  if (!(delta_ > 0.0)) throw ValidationError("schedule.delta must be positive");
  if (grid_.d != kernel_.dimension()) throw ValidationError("grid and kernel dimensions differ");
  t_cross_ = crossover_time(grid_);
  drift_rate_ = std::sqrt(2.0 * grid_.d);
}

std::shared_ptr<const CirculantSpectrum> FieldSampler::spectrum(double s, double dt) const {
  const std::pair<double, double> key{s, dt};
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto built = std::make_shared<const CirculantSpectrum>(build_increment_covariance(kernel_, grid_, s, dt));
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(key, std::move(built)).first->second;
}

void FieldSampler::prepare(double t_final) const {
  const ScaleSchedule schedule{delta_, t_final};
  const auto times = schedule.times();
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (times[i] >= t_cross_) break;
    spectrum(times[i], times[i + 1] - times[i]);
  }
}

FieldState FieldSampler::initial_state(std::uint64_t seed, std::uint64_t replica) const {
  FieldState state;
  state.values.assign(grid_.size(), 0.0);
  state.seed = seed;
  state.replica = replica;
  return state;
}

void FieldSampler::synthesize(const CirculantSpectrum& spec, RandomStream& rng, std::span<double> out) const {
  Workspace& ws = thread_workspace();
  ws.ensure(spec.d, spec.m);
  const FftPlans plans = plans_for(spec.d, spec.m);
  const std::size_t size = spec.embedded_size();
  for (std::size_t i = 0; i < size; ++i) ws.real[i] = rng.normal();
  fftw_execute_dft_r2c(plans.forward, ws.real, ws.spectrum);
  for (std::size_t k = 0; k < spec.scaled_sqrt.size(); ++k) {
    ws.spectrum[k][0] *= spec.scaled_sqrt[k];
    ws.spectrum[k][1] *= spec.scaled_sqrt[k];
  }
  fftw_execute_dft_c2r(plans.backward, ws.spectrum, ws.real);
  if (spec.d == 1) {
    std::memcpy(out.data(), ws.real, out.size() * sizeof(double));
  } else {
    const int n = grid_.n;
    for (int a = 0; a < n; ++a) {
      std::memcpy(out.data() + static_cast<std::size_t>(a) * n, ws.real + static_cast<std::size_t>(a) * spec.m,
                  n * sizeof(double));
    }
  }
}

void FieldSampler::advance(FieldState& state, double dt) const {
  if (!(dt >= 0.0)) throw ValidationError("advance needs dt >= 0");
  if (state.values.size() != grid_.size()) throw ValidationError("field state does not match the grid");
  if (dt == 0.0) return;
  RandomStream rng(state.seed, state.replica, state.step);
  const double drift = -drift_rate_ * dt;
  if (state.t >= t_cross_) {
    const double sd = std::sqrt(dt);
    for (double& v : state.values) v += drift + sd * rng.normal();
  } else {
    const auto spec = spectrum(state.t, dt);
    thread_local std::vector<double> increment;
    increment.resize(state.values.size());
    synthesize(*spec, rng, increment);
    for (std::size_t i = 0; i < increment.size(); ++i) state.values[i] += drift + increment[i];
  }
  state.t += dt;
  ++state.step;
}

void FieldSampler::advance_to(FieldState& state, double t) const {
  while (state.t < t - kTimeEps) {
    double next = (std::floor(state.t / delta_ + kTimeEps) + 1.0) * delta_;
    if (next > t - kTimeEps) next = t;
    advance(state, next - state.t);
    state.t = next;
  }
}

FieldState FieldSampler::sample_field(double t_final, std::uint64_t seed, std::uint64_t replica) const {
  if (!(t_final >= 0.0)) throw ValidationError("t_final must be nonnegative");
  FieldState state = initial_state(seed, replica);
  advance_to(state, t_final);
  return state;
}

std::pair<FieldState, FieldState> FieldSampler::sample_increment_field(double l, double s, std::uint64_t seed,
                                                                       std::uint64_t replica) const {
  if (!(l >= 0.0) || !(s >= 0.0)) throw ValidationError("increment field needs l, s >= 0");
  FieldState state = initial_state(seed, replica);
  advance_to(state, l);
  FieldState first = state;
  advance_to(state, l + s);
  return {std::move(first), std::move(state)};
}

std::vector<double> sample_point_path(std::span<const double> times, int d, std::uint64_t seed,
                                      std::uint64_t replica) {
  std::vector<double> path(times.size(), 0.0);
  const double rate = std::sqrt(2.0 * d);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    RandomStream rng(seed, replica, static_cast<std::uint32_t>(i - 1));
    path[i] = path[i - 1] - rate * dt + std::sqrt(dt) * rng.normal();
  }
  return path;
}

}  // namespace logcorr
