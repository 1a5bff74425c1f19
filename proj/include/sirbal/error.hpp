#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sirbal {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raw channel with a non-positive direct gain or noise variance.
class InvalidChannel : public Error {
 public:
  using Error::Error;
};

/// A model or constraint invariant does not hold (negative gain, empty column, ...).
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of the evaluated function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// One or more matrices that must be irreducible are not.
/// `indices` names the offending constraints (empty for a bare matrix).
class NotIrreducible : public Error {
 public:
  explicit NotIrreducible(const std::string& what, std::vector<std::size_t> indices = {})
      : Error(what), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// An iterative method ran out of iterations. Carries the best iterate.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, Eigen::VectorXd last_iterate, double residual,
                std::size_t iterations)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
  std::size_t iterations_;
};

/// rho(M) * t >= 1: the requested fixed point does not exist.
class SpectralRadiusViolation : public Error {
 public:
  SpectralRadiusViolation(const std::string& what, double scaled_radius)
      : Error(what), scaled_radius_(scaled_radius) {}

  double scaled_radius() const noexcept { return scaled_radius_; }

 private:
  double scaled_radius_;
};

class NotOnBoundary : public Error {
 public:
  NotOnBoundary(const std::string& what, double max_lambda)
      : Error(what), max_lambda_(max_lambda) {}

  double max_lambda() const noexcept { return max_lambda_; }

 private:
  double max_lambda_;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class NoFeasibleT : public Error {
 public:
  using Error::Error;
};

/// A mathematically guaranteed property failed numerically.
class InternalInvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace sirbal
