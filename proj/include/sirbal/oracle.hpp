#pragma once

// Ground-truth routes that never touch the Perron machinery.

#include "sirbal/error.hpp"
#include "sirbal/model.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

namespace sirbal::oracle {

struct BisectOptions {
  double tol_t = 1e-10;
  double neumann_rel = 1e-15;
  std::size_t max_terms = 2000000;
};

/// Partial sums of t * sum_j (t Gamma V)^j Gamma z. Returns nullopt as soon as
/// a partial sum leaves P; the sums only grow, so the limit is then outside P too
/// (or the series diverges).
inline std::optional<Vector> fixed_point_within(const NetworkModel& model,
                                                const ConstraintPolytope& poly, double t,
                                                const BisectOptions& opt = {}) {
  const Matrix m = t * model.scaled_gains();
  Vector term = t * model.scaled_noise();
  Vector sum = term;
  const auto over = [&](const Vector& p) {
    return ((poly.incidence() * p).array() > poly.budgets().array()).any();
  };
  if (over(sum)) return std::nullopt;
  for (std::size_t j = 1; j < opt.max_terms; ++j) {
    term = m * term;
    sum += term;
    if (over(sum)) return std::nullopt;
    if (term.maxCoeff() <= opt.neumann_rel * sum.maxCoeff()) return sum;
  }
  throw NoConvergence("oracle: Neumann partial sums stalled inside P", sum, term.maxCoeff(),
                      opt.max_terms);
}

struct BisectResult {
  double t_star = 0.0;
  Vector p;
  std::size_t steps = 0;
};

/// Largest balancing level t with p(t) = (I/t - Gamma V)^{-1} Gamma z inside P.
inline BisectResult bisect_maxmin(const NetworkModel& model, const ConstraintPolytope& poly,
                                  const BisectOptions& opt = {}) {
  check_compatible(model, poly);
  // Row sums of Gamma (V + z 1^T / min P) bound every B[n] from above.
  const Vector gz = model.scaled_noise();
  const double row_bound =
      (model.scaled_gains().rowwise().sum() + gz * (static_cast<double>(model.links()) /
                                                    poly.budgets().minCoeff()))
          .maxCoeff();
  double lo = 0.5 / row_bound;
  std::optional<Vector> p_lo = fixed_point_within(model, poly, lo, opt);
  for (int i = 0; !p_lo && i < 200; ++i) {
    lo *= 0.5;
    p_lo = fixed_point_within(model, poly, lo, opt);
  }
  if (!p_lo) throw NoFeasibleT("oracle: no feasible balancing level found");

  double hi = 2.0 * lo;
  for (int i = 0; fixed_point_within(model, poly, hi, opt); ++i) {
    lo = hi;
    hi *= 2.0;
    if (i > 2000) throw NoFeasibleT("oracle: balancing level is unbounded");
  }
  p_lo = fixed_point_within(model, poly, lo, opt);

  BisectResult r;
  while (hi - lo >= opt.tol_t) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (auto p = fixed_point_within(model, poly, mid, opt)) {
      lo = mid;
      p_lo = std::move(p);
    } else {
      hi = mid;
    }
    ++r.steps;
  }
  r.t_star = lo;
  r.p = std::move(*p_lo);
  return r;
}

/// Targets are achievable within P iff the fixed point at t = 1 exists and
/// lies in P. Returns that fixed point as the witness.
inline std::optional<Vector> targets_feasible(const NetworkModel& model,
                                              const ConstraintPolytope& poly,
                                              const BisectOptions& opt = {}) {
  check_compatible(model, poly);
  return fixed_point_within(model, poly, 1.0, opt);
}

struct GridResult {
  double level = 0.0;
  Vector p;
};

/// Best min_k SIR_k(p)/gamma_k over a resolution x resolution grid of the
/// bounding box of P (K = 2 only). Never exceeds the true optimum.
inline GridResult grid_bruteforce(const NetworkModel& model, const ConstraintPolytope& poly,
                                  std::size_t resolution) {
  check_compatible(model, poly);
  if (model.links() != 2) throw UnsupportedDimension("grid_bruteforce supports K = 2 only");
  if (resolution < 100) throw DomainError("grid_bruteforce: resolution must be >= 100");
  const Vector ub = poly.box();
  const Matrix& v = model.gains();
  const Vector& z = model.noise();
  const Vector& gamma = model.targets();
  const Matrix& c = poly.incidence();
  const Vector& budget = poly.budgets();

  GridResult best;
  best.level = -1.0;
  best.p = Vector::Zero(2);
  const auto res = static_cast<double>(resolution);
  for (std::size_t i = 1; i <= resolution; ++i) {
    const double p1 = ub[0] * static_cast<double>(i) / res;
    for (std::size_t j = 1; j <= resolution; ++j) {
      const double p2 = ub[1] * static_cast<double>(j) / res;
      bool inside = true;
      for (Eigen::Index n = 0; n < c.rows() && inside; ++n)
        inside = c(n, 0) * p1 + c(n, 1) * p2 <= budget[n];
      if (!inside) continue;
      const double r1 = p1 / (v(0, 1) * p2 + z[0]) / gamma[0];
      const double r2 = p2 / (v(1, 0) * p1 + z[1]) / gamma[1];
      const double level = std::min(r1, r2);
      if (level > best.level) {
        best.level = level;
        best.p << p1, p2;
      }
    }
  }
  return best;
}

}  // namespace sirbal::oracle
