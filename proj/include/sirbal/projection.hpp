#pragma once

#include "sirbal/error.hpp"
#include "sirbal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace sirbal {

struct DykstraOptions {
  double tol = 1e-15;
  std::size_t max_cycles = 200000;
};

/// Euclidean projection onto {x : normals.row(i) x <= bounds(i) for all i, x >= lower}
/// by Dykstra's alternating projections.
inline Vector dykstra_project(const Vector& point, const Matrix& normals, const Vector& bounds,
                              const Vector& lower, const DykstraOptions& opt = {}) {
  if (!point.allFinite()) throw DomainError("dykstra_project: point has non-finite entries");
  const auto k = point.size();
  const auto sets = normals.rows();
  Vector x = point;
  Matrix increments = Matrix::Zero(k, sets + 1);
  const Vector norms2 = normals.rowwise().squaredNorm();

  for (std::size_t cycle = 0; cycle < opt.max_cycles; ++cycle) {
    const Vector start = x;
    for (Eigen::Index i = 0; i < sets; ++i) {
      const Vector y = x + increments.col(i);
      const double excess = normals.row(i).dot(y) - bounds[i];
      x = excess > 0.0 ? Vector(y - (excess / norms2[i]) * normals.row(i).transpose()) : y;
      increments.col(i) = y - x;
    }
    const Vector y = x + increments.col(sets);
    x = y.cwiseMax(lower);
    increments.col(sets) = y - x;

    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    if ((x - start).cwiseAbs().maxCoeff() <= opt.tol * scale) return x;
  }
  throw NoConvergence("dykstra projection did not converge", x, 0.0, opt.max_cycles);
}

/// Projection of `point` onto P intersected with {p >= floor} in the
/// weighted norm sum_k ((x_k - point_k) / scale_k)^2. scale = 1 is Euclidean.
inline Vector project_to_polytope(const Vector& point, const ConstraintPolytope& poly, double floor,
                                  const Vector& scale, const DykstraOptions& opt = {}) {
  // In u = x / scale the weighted problem is Euclidean.
  const Matrix normals = poly.incidence() * scale.asDiagonal();
  const Vector u0 = point.cwiseQuotient(scale);
  const Vector lower = Vector::Constant(point.size(), floor).cwiseQuotient(scale);
  return dykstra_project(u0, normals, poly.budgets(), lower, opt).cwiseProduct(scale);
}

inline Vector project_to_polytope(const Vector& point, const ConstraintPolytope& poly, double floor) {
  return project_to_polytope(point, poly, floor, Vector::Ones(point.size()));
}

/// Euclidean projection onto {w : sum(w) = 1, w >= floor} (sort-based).
inline Vector project_simplex(const Vector& v, double floor = 0.0) {
  const auto k = v.size();
  const double mass = 1.0 - static_cast<double>(k) * floor;
  if (!(mass > 0.0)) throw DomainError("project_simplex: floor too large for dimension");
  const Vector shifted = v.array() - floor;
  std::vector<double> sorted(shifted.data(), shifted.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - mass) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (shifted.array() - theta).cwiseMax(0.0) + floor;
}

}  // namespace sirbal
