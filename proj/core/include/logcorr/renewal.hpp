#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "logcorr/functionals.hpp"
#include "logcorr/kernel.hpp"
#include "logcorr/paths.hpp"
#include "logcorr/rng.hpp"

namespace logcorr {

/// Inverse Gaussian IG(mu, lambda) by the Michael-Schucany-Haas transformation.
double sample_inverse_gaussian(double mu, double lambda, RandomStream& rng);

/// First time a Brownian bridge over [0, h] from a > 0 to -c (c >= 0) hits 0.
/// A bridge from a to c > 0 conditioned to hit 0 has the same hitting time law.
double bridge_hitting_time(double a, double c, double h, RandomStream& rng);

/// X = B until T_{-gamma}, then -gamma + a Bessel-3 process from 0, sampled at
/// k * h on [0, sigma] with h = sigma / ceil(sigma / dt). The hitting time is
/// detected with the bridge probability and drawn from its exact conditional law.
struct ConcatPath {
  std::vector<double> values;
  double step = 0.0;
  double hit_time = 0.0;  // +inf when X has not reached -gamma by sigma
};

ConcatPath concatenated_path(double gamma, double sigma, double dt, RandomStream& rng);

/// (<-g)_s = g_{sigma - s} - g_sigma on a uniformly sampled path.
std::vector<double> reverse_path(std::span<const double> g);

struct RenewalConfig {
  double alpha = 1.0;
  double z = 1.0;
  double t = 64.0;
  double m = 1.0;
  double sigma = 0.0;
  double dt = 1e-2;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  void validate() const;
};

/// (t^{3/2} / alpha) E_alpha[1{B >= 0 on [0,t], B >= z on [t/2,t], B_t - z <= m}
///   F(B_t - z, (B_{t-sigma+s} - B_{t-sigma})_{s <= sigma})].
/// B_t is drawn uniformly on [z, z+m] with its density as weight, the rest of
/// the path as Brownian bridges, and both barriers enter through exact bridge
/// survival probabilities.
McEstimate renewal_lhs(const Functional& f, const RenewalConfig& config);

/// sqrt(2/pi) int_0^m int_0^u E F(u, <-X(T_{-gamma}, B, R)) d gamma du, with
/// stratified sampling of (gamma, u) on the triangle.
McEstimate renewal_rhs(const Functional& f, const RenewalConfig& config);

/// Same target for F(u, g) = 1{g_sigma <= level}: Gauss-Legendre over gamma of
/// (m - gamma) P(-X^gamma_sigma <= level), with independent endpoint MC per node.
McEstimate renewal_rhs_factorized(double level, const RenewalConfig& config, int nodes = 16);

struct CMSigmaConfig {
  double M = 1.0;
  double sigma = 1.0;
  double b = 0.5;
  double dt = 1e-2;
  int n = 9;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  void validate() const;
};

/// sqrt(2/pi) int_0^M int_0^u E F^{(M)}(-u, G) d gamma du with
/// G(y e^b) = Z(y) - zeta(y) - int_0^sigma (1 - k(e^{-s} y)) dX_s for y on the
/// unit grid; Z has the limiting covariance and the integral is a left-point sum.
McEstimate constant_c_m_sigma(const Functional& f, const KernelSpec& kernel, const CMSigmaConfig& config);

}  // namespace logcorr
