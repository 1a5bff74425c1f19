#pragma once

#include "sirbal/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

namespace sirbal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail

/// Interference environment in normalized form: cross gains V (zero
/// diagonal), noise z and SIR targets gamma. Immutable once built.
class NetworkModel {
 public:
  NetworkModel(Matrix gains, Vector noise, Vector targets)
      : V_(std::move(gains)), z_(std::move(noise)), gamma_(std::move(targets)) {
    const auto k = V_.rows();
    if (k < 2) throw InvalidModel("network needs at least 2 links, got " + std::to_string(k));
    if (V_.cols() != k)
      throw DimensionError("gain matrix must be square, got " + detail::dims(V_.rows(), V_.cols()));
    if (z_.size() != k)
      throw DimensionError("noise vector has length " + std::to_string(z_.size()) +
                           ", expected " + std::to_string(k));
    if (gamma_.size() != k)
      throw DimensionError("target vector has length " + std::to_string(gamma_.size()) +
                           ", expected " + std::to_string(k));
    if (!detail::all_finite(V_) || !detail::all_finite(z_) || !detail::all_finite(gamma_))
      throw InvalidModel("network model contains non-finite values");
    for (Eigen::Index i = 0; i < k; ++i) {
      if (V_(i, i) != 0.0)
        throw InvalidModel("gain matrix diagonal must be zero (row " + std::to_string(i) + ")");
      for (Eigen::Index j = 0; j < k; ++j)
        if (V_(i, j) < 0.0)
          throw InvalidModel("negative gain at (" + std::to_string(i) + "," + std::to_string(j) +
                             ")");
      if (!(z_[i] > 0.0)) throw InvalidModel("noise must be positive (link " + std::to_string(i) + ")");
      if (!(gamma_[i] > 0.0))
        throw InvalidModel("SIR target must be positive (link " + std::to_string(i) + ")");
    }
  }

  std::size_t links() const noexcept { return static_cast<std::size_t>(V_.rows()); }
  const Matrix& gains() const noexcept { return V_; }
  const Vector& noise() const noexcept { return z_; }
  const Vector& targets() const noexcept { return gamma_; }

  /// Same interference environment, different SIR targets.
  NetworkModel with_targets(Vector targets) const { return NetworkModel(V_, z_, std::move(targets)); }

  /// Gamma * V.
  Matrix scaled_gains() const { return gamma_.asDiagonal() * V_; }
  /// Gamma * z.
  Vector scaled_noise() const { return gamma_.cwiseProduct(z_); }

 private:
  Matrix V_;
  Vector z_;
  Vector gamma_;
};

/// Raw attenuations G (G(k,l): transmitter l to receiver k) and noise variances.
struct RawChannel {
  Matrix G;
  Vector sigma2;
};

/// P = {p >= 0 : C p <= p_hat} with C a 0/1 matrix whose every column has a one.
class ConstraintPolytope {
 public:
  ConstraintPolytope(Matrix incidence, Vector budgets)
      : C_(std::move(incidence)), p_hat_(std::move(budgets)) {
    if (C_.rows() < 1) throw InvalidModel("at least one power constraint is required");
    if (p_hat_.size() != C_.rows())
      throw DimensionError("budget vector has length " + std::to_string(p_hat_.size()) +
                           ", expected " + std::to_string(C_.rows()));
    for (Eigen::Index n = 0; n < C_.rows(); ++n) {
      if (!(p_hat_[n] > 0.0) || !std::isfinite(p_hat_[n]))
        throw InvalidModel("power budget must be positive (constraint " + std::to_string(n) + ")");
      for (Eigen::Index k = 0; k < C_.cols(); ++k)
        if (C_(n, k) != 0.0 && C_(n, k) != 1.0)
          throw InvalidModel("constraint matrix entries must be 0 or 1");
    }
    for (Eigen::Index k = 0; k < C_.cols(); ++k)
      if (C_.col(k).sum() < 1.0)
        throw InvalidModel("link " + std::to_string(k) + " is not covered by any constraint");
  }

  std::size_t constraints() const noexcept { return static_cast<std::size_t>(C_.rows()); }
  std::size_t links() const noexcept { return static_cast<std::size_t>(C_.cols()); }
  const Matrix& incidence() const noexcept { return C_; }
  const Vector& budgets() const noexcept { return p_hat_; }
  /// Row n of C as a column vector.
  Vector row(std::size_t n) const { return C_.row(static_cast<Eigen::Index>(n)).transpose(); }

  /// Per-coordinate upper bound implied by the constraints.
  Vector box() const {
    Vector ub(C_.cols());
    for (Eigen::Index k = 0; k < C_.cols(); ++k) {
      double b = std::numeric_limits<double>::infinity();
      for (Eigen::Index n = 0; n < C_.rows(); ++n)
        if (C_(n, k) == 1.0) b = std::min(b, p_hat_[n]);
      ub[k] = b;
    }
    return ub;
  }

 private:
  Matrix C_;
  Vector p_hat_;
};

inline void check_compatible(const NetworkModel& model, const ConstraintPolytope& poly) {
  if (poly.links() != model.links())
    throw DimensionError("constraint matrix has " + std::to_string(poly.links()) +
                         " columns, network has " + std::to_string(model.links()) + " links");
}

/// v(k,l) = G(k,l)/G(k,k), z(k) = sigma2(k)/G(k,k).
inline NetworkModel normalize_channel(const RawChannel& raw, const Vector& gamma) {
  const auto k = raw.G.rows();
  if (raw.G.cols() != k)
    throw DimensionError("attenuation matrix must be square, got " +
                         detail::dims(raw.G.rows(), raw.G.cols()));
  if (raw.sigma2.size() != k || gamma.size() != k)
    throw DimensionError("noise/target length does not match attenuation matrix");
  Matrix V = Matrix::Zero(k, k);
  Vector z(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double direct = raw.G(i, i);
    if (!(direct > 0.0)) throw InvalidChannel("direct gain G(" + std::to_string(i) + "," +
                                              std::to_string(i) + ") must be positive");
    if (!(raw.sigma2[i] > 0.0))
      throw InvalidChannel("noise variance must be positive (link " + std::to_string(i) + ")");
    for (Eigen::Index j = 0; j < k; ++j) {
      if (raw.G(i, j) < 0.0) throw InvalidChannel("negative attenuation");
      if (j != i) V(i, j) = raw.G(i, j) / direct;
    }
    z[i] = raw.sigma2[i] / direct;
  }
  return NetworkModel(std::move(V), std::move(z), gamma);
}

/// SIR_k(p) = p_k / ((V p)_k + z_k).
inline Vector sir(const NetworkModel& model, const Vector& p) {
  if (static_cast<std::size_t>(p.size()) != model.links())
    throw DimensionError("power vector has length " + std::to_string(p.size()));
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (!(p[k] > 0.0)) throw DomainError("power must be positive (link " + std::to_string(k) + ")");
  const Vector interference = model.gains() * p + model.noise();
  return p.cwiseQuotient(interference);
}

/// SIR_k(p) / gamma_k.
inline Vector sir_ratios(const NetworkModel& model, const Vector& p) {
  return sir(model, p).cwiseQuotient(model.targets());
}

/// g_n(p) = c_n^T p / P_n for every constraint.
inline Vector constraint_levels(const ConstraintPolytope& poly, const Vector& p) {
  if (static_cast<std::size_t>(p.size()) != poly.links())
    throw DimensionError("power vector has length " + std::to_string(p.size()) + ", expected " +
                         std::to_string(poly.links()));
  return (poly.incidence() * p).cwiseQuotient(poly.budgets());
}

/// 17 significant digits; round-trips every double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace sirbal
