#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace nclab {

// Norm exponents outside (1, inf): the constrained minimizer is no longer
// characterized by a Lagrange equation, so these are rejected, not approximated.
class UnsupportedNorm : public std::invalid_argument {
 public:
  explicit UnsupportedNorm(const std::string& what) : std::invalid_argument(what) {}
};

// An internal numerical routine (Newton solve, SVD) failed to produce a result.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

// Iteration budget exhausted before the convergence criterion was met.
// Carries the last iterate (when meaningful) and the final residual.
class NonConverged : public std::runtime_error {
 public:
  NonConverged(const std::string& what, double residual, long iterations,
               Eigen::VectorXd last_iterate = {})
      : std::runtime_error(what),
        residual(residual),
        iterations(iterations),
        last_iterate(std::move(last_iterate)) {}

  double residual;
  long iterations;
  Eigen::VectorXd last_iterate;
};

}  // namespace nclab
