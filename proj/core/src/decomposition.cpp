#include <Eigen/Dense>
#include <cmath>

#include "logcorr/errors.hpp"
#include "logcorr/sampler.hpp"

namespace logcorr {

namespace {
constexpr std::uint32_t kZSubstream = 0xFFFF0000u;
}

std::vector<double> psd_factor(std::span<const double> gram, std::size_t size, double tol,
                               double* min_eigenvalue) {
  if (gram.size() != size * size) throw ValidationError("Gram matrix has the wrong size");
  std::vector<double> out(size * size, 0.0);
  if (size == 0) return out;
  Eigen::MatrixXd g(size, size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) g(i, j) = 0.5 * (gram[i * size + j] + gram[j * size + i]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the Gram matrix failed");
  const Eigen::VectorXd lambda = solver.eigenvalues();
  const double lowest = lambda.minCoeff();
  if (min_eigenvalue) *min_eigenvalue = lowest;
  if (lowest < -tol) throw PsdFailure(lowest);
  const Eigen::MatrixXd a = solver.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) out[i * size + j] = a(i, j);
  return out;
}

ConditionalDecomposer::ConditionalDecomposer(const KernelSpec& kernel, Point anchor, std::vector<Point> targets,
                                             std::vector<double> times)
    : anchor_(anchor), targets_(std::move(targets)), times_(std::move(times)) {
  if (times_.size() < 2 || times_.front() != 0.0) {
    throw ValidationError("decomposition needs a time grid starting at 0 with at least one step");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw ValidationError("decomposition times must be increasing");
  }
  const std::size_t nt = targets_.size();
  const std::size_t steps = times_.size() - 1;
  const double t = times_.back();

  weights_.resize(nt * steps);
  zeta_.resize(nt);
  std::vector<Point> offsets(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    offsets[j] = {anchor_[0] - targets_[j][0], anchor_[1] - targets_[j][1]};
    for (std::size_t i = 0; i < steps; ++i) {
      const double e = std::exp(times_[i]);
      weights_[j * steps + i] = eval_kernel(kernel, {offsets[j][0] * e, offsets[j][1] * e});
    }
    zeta_[j] = zeta(kernel, offsets[j], t);
  }

  std::vector<double> gram(nt * nt);
  double scale = 1.0;
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = a; b < nt; ++b) {
      const double c = conditional_z_cov(kernel, anchor_, targets_[a], targets_[b], t);
      gram[a * nt + b] = c;
      gram[b * nt + a] = c;
    }
    scale = std::max(scale, gram[a * nt + a]);
  }
  factor_ = psd_factor(gram, nt, 1e-6 * scale, &min_eigenvalue_);
  // A target at the anchor has a degenerate Z; keep it exactly zero.
  for (std::size_t a = 0; a < nt; ++a) {
    if (gram[a * nt + a] <= 0.0) std::fill_n(factor_.begin() + static_cast<std::ptrdiff_t>(a * nt), nt, 0.0);
  }
}

Decomposition ConditionalDecomposer::decompose(std::span<const double> anchor_path, std::uint64_t seed,
                                               std::uint64_t replica) const {
  if (anchor_path.size() != times_.size()) throw ValidationError("anchor path does not match the time grid");
  const std::size_t nt = targets_.size();
  const std::size_t steps = times_.size() - 1;

  Decomposition out;
  out.anchor = anchor_;
  out.targets = targets_;
  out.P.assign(nt, 0.0);
  out.Z.assign(nt, 0.0);
  out.zeta = zeta_;
  out.Y.resize(nt);

  for (std::size_t j = 0; j < nt; ++j) {
    double p = 0.0;
    for (std::size_t i = 0; i < steps; ++i) p += weights_[j * steps + i] * (anchor_path[i + 1] - anchor_path[i]);
    out.P[j] = p;
  }

  RandomStream rng(seed, replica, kZSubstream);
  std::vector<double> noise(nt);
  rng.fill_normal(noise);
  for (std::size_t a = 0; a < nt; ++a) {
    double z = 0.0;
    for (std::size_t b = 0; b < nt; ++b) z += factor_[a * nt + b] * noise[b];
    out.Z[a] = z;
  }
  for (std::size_t j = 0; j < nt; ++j) out.Y[j] = out.P[j] + out.Z[j] - out.zeta[j];
  return out;
}

Decomposition decompose_conditional(const KernelSpec& kernel, Point anchor, std::span<const double> times,
                                    std::span<const double> anchor_path, std::vector<Point> targets,
                                    std::uint64_t seed, std::uint64_t replica) {
  const ConditionalDecomposer decomposer(kernel, anchor, std::move(targets),
                                         std::vector<double>(times.begin(), times.end()));
  return decomposer.decompose(anchor_path, seed, replica);
}

}  // namespace logcorr
