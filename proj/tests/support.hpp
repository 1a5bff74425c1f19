#pragma once

#include "sirbal/sirbal.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fixtures {

using sirbal::ConstraintPolytope;
using sirbal::Matrix;
using sirbal::NetworkModel;
using sirbal::Scenario;
using sirbal::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

// Symmetric pair, both budgets active.
inline Scenario e1() {
  return {NetworkModel(mat({{0, 0.5}, {0.5, 0}}), vec({1, 1}), vec({1, 1})),
          ConstraintPolytope(Matrix::Identity(2, 2), vec({1, 1}))};
}

// Asymmetric pair, only the second budget active.
inline Scenario e2() {
  return {NetworkModel(mat({{0, 0.2}, {0.4, 0}}), vec({0.1, 0.1}), vec({1, 2})),
          ConstraintPolytope(Matrix::Identity(2, 2), vec({1, 1}))};
}

// E2 under a single sum budget of 2.
inline Scenario e3() {
  return {NetworkModel(mat({{0, 0.2}, {0.4, 0}}), vec({0.1, 0.1}), vec({1, 2})),
          ConstraintPolytope(mat({{1, 1}}), vec({2}))};
}

// No interference, unit noise and targets.
inline Scenario quiet() {
  return {NetworkModel(Matrix::Zero(2, 2), vec({1, 1}), vec({1, 1})),
          ConstraintPolytope(Matrix::Identity(2, 2), vec({1, 1}))};
}

/// Deterministic mix of K <= 10, N <= 5 scenarios over all constraint kinds.
inline Scenario random_scenario(std::size_t i) {
  sirbal::GenerateOptions o;
  o.seed = 1000 + i;
  o.links = 2 + i % 9;
  o.random_targets = (i / 3) % 2 == 1;
  o.density = (i / 6) % 3 == 2 ? 0.6 : 1.0;
  switch (i % 3) {
    case 0:
      if (o.links <= 5) {
        o.kind = sirbal::ConstraintKind::Individual;
        o.constraints = o.links;
        break;
      }
      [[fallthrough]];
    case 1:
      o.kind = sirbal::ConstraintKind::Sum;
      o.constraints = 1;
      break;
    default:
      o.kind = sirbal::ConstraintKind::Mixed;
      o.constraints = 1 + (i / 3) % 5;
      break;
  }
  return sirbal::generate_scenario(o);
}

inline std::vector<Scenario> random_suite(std::size_t count) {
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_scenario(i));
  return out;
}

inline double rel_max_error(const Vector& a, const Vector& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

/// Uniform point of P: uniform in the bounding box, pulled inside by scaling.
inline Vector random_feasible(const ConstraintPolytope& poly, std::mt19937_64& rng,
                              double min_fraction = 1e-3) {
  const Vector box = poly.box();
  std::uniform_real_distribution<double> u(min_fraction, 1.0);
  Vector p(box.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = u(rng) * box[k];
  const double top = sirbal::constraint_levels(poly, p).maxCoeff();
  if (top > 1.0) p /= top;
  return p;
}

inline Vector random_positive(Eigen::Index k, std::mt19937_64& rng, double lo = 0.05,
                              double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(k);
  for (Eigen::Index i = 0; i < k; ++i) v[i] = u(rng);
  return v;
}

}  // namespace fixtures
