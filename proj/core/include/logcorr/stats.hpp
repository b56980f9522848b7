#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace logcorr {

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Welford accumulator. Merging is exact in exact arithmetic; callers that need
/// bitwise reproducibility feed samples in a fixed order.
class RunningStats {
 public:
  void add(double v) noexcept;
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;  // unbiased
  double stddev() const noexcept;
  double standard_error() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

MeanEstimate estimate_mean(std::span<const double> samples);

/// Sample covariance of paired samples and the standard error of that estimate
/// (delta method on the centred products).
struct CovarianceEstimate {
  double cov = 0.0;
  double stderr_ = 0.0;
};
CovarianceEstimate estimate_covariance(std::span<const double> a, std::span<const double> b);

double standard_normal_cdf(double x) noexcept;

/// Linear-interpolated quantile (type 7) of an already sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf);

/// Asymptotic p-value of the one-sample KS statistic for sample size n
/// (Stephens' small-sample correction of the Kolmogorov series).
double ks_pvalue(double statistic, std::size_t n);

/// Upper-tail probability of a chi-square variable.
double chi_square_pvalue(double statistic, double degrees_of_freedom);

}  // namespace logcorr

#include <algorithm>

template <typename Cdf>
double logcorr::ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}
