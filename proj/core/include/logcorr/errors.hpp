#pragma once

#include <stdexcept>
#include <string>

namespace logcorr {

// Bad input: parameters, configuration, regions outside the grid.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver a result at the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Circulant embedding produced an eigenvalue below -eps_spd.
class NegativeSpectrum : public NumericalError {
 public:
  explicit NegativeSpectrum(double worst)
      : NumericalError("negative circulant spectrum, worst eigenvalue " + std::to_string(worst)),
        worst_(worst) {}
  double worst() const noexcept { return worst_; }

 private:
  double worst_;
};

// Dense Gram matrix is not positive semidefinite beyond tolerance.
class PsdFailure : public NumericalError {
 public:
  explicit PsdFailure(double min_eigenvalue)
      : NumericalError("Gram matrix not positive semidefinite, min eigenvalue " +
                       std::to_string(min_eigenvalue)),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(double error_estimate, double tolerance)
      : NumericalError("adaptive quadrature did not reach tolerance " + std::to_string(tolerance) +
                       " (error estimate " + std::to_string(error_estimate) + ")"),
        error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class NonIntegrableProfile : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A one-dimensional minimisation failed to bracket or converge.
class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace logcorr
