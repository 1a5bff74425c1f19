#pragma once

#include "sirbal/error.hpp"
#include "sirbal/model.hpp"
#include "sirbal/spectral.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sirbal {

/// Tolerances shared by the eigen-route solvers.
struct SolverConfig {
  PerronOptions perron{};
  /// Relative slack used for active constraints and for ties among Perron roots.
  double tol_active = 1e-7;
  /// Neumann series truncation: stop once a term is below this fraction of the partial sum.
  double neumann_rel = 1e-14;
  std::size_t neumann_max_terms = 1000000;
};

/// Per-constraint extended gain matrices.
///
/// B[n] = Gamma V + (1/P_n) Gamma z c_n^T is K x K; A[n] is the (K+1) x (K+1)
/// matrix acting on (p, 1). Both share the Perron root rho_B[n].
struct ExtendedMatrices {
  std::vector<Matrix> B;
  std::vector<Matrix> A;
  Vector rho_B;
  std::vector<PerronTriple> perron_B;
};

/// Builds B[n] without any spectral computation.
inline Matrix extended_b(const NetworkModel& model, const ConstraintPolytope& poly, std::size_t n) {
  const Vector gz = model.scaled_noise();
  return model.scaled_gains() + (gz * poly.row(n).transpose()) / poly.budgets()[static_cast<Eigen::Index>(n)];
}

inline Matrix extended_a(const NetworkModel& model, const ConstraintPolytope& poly, std::size_t n) {
  const auto k = static_cast<Eigen::Index>(model.links());
  const Matrix gv = model.scaled_gains();
  const Vector gz = model.scaled_noise();
  const Vector c = poly.row(n);
  const double budget = poly.budgets()[static_cast<Eigen::Index>(n)];
  Matrix a(k + 1, k + 1);
  a.topLeftCorner(k, k) = gv;
  a.topRightCorner(k, 1) = gz;
  a.bottomLeftCorner(1, k) = (c.transpose() * gv) / budget;
  a(k, k) = c.dot(gz) / budget;
  return a;
}

/// Assembles every B[n] and A[n] and computes the Perron roots of the B's.
/// Throws NotIrreducible naming every constraint whose B[n] is reducible.
inline ExtendedMatrices build_extended(const NetworkModel& model, const ConstraintPolytope& poly,
                                       const SolverConfig& cfg = {}) {
  check_compatible(model, poly);
  const std::size_t count = poly.constraints();
  ExtendedMatrices ext;
  ext.B.reserve(count);
  ext.A.reserve(count);
  std::vector<std::size_t> reducible;
  for (std::size_t n = 0; n < count; ++n) {
    ext.B.push_back(extended_b(model, poly, n));
    ext.A.push_back(extended_a(model, poly, n));
    if (!is_irreducible(ext.B.back())) reducible.push_back(n);
  }
  if (!reducible.empty()) {
    std::string list;
    for (auto n : reducible) list += (list.empty() ? "" : ", ") + std::to_string(n);
    throw NotIrreducible("extended matrix B[n] is reducible for n in {" + list + "}", reducible);
  }
  ext.rho_B.resize(static_cast<Eigen::Index>(count));
  for (std::size_t n = 0; n < count; ++n) {
    ext.perron_B.push_back(perron(ext.B[n], cfg.perron));
    ext.rho_B[static_cast<Eigen::Index>(n)] = ext.perron_B.back().rho;
  }
  return ext;
}

struct SolveDiagnostics {
  /// max-norm of B p - beta p, relative to max(p).
  double eigen_residual = 0.0;
  /// max-norm of A (p,1) - beta (p,1), relative to max(p,1).
  double a_route_residual = 0.0;
  /// max_k |gamma_k/SIR_k - beta| / beta.
  double balance_spread = 0.0;
  /// max_n g_n(p_bar).
  double max_constraint_level = 0.0;
  std::size_t perron_iterations = 0;
  /// Active set from constraint levels equals the argmax set of the Perron roots.
  bool active_set_consistent = true;
};

struct MaxMinSolution {
  Vector p_bar;
  /// Common ratio gamma_k / SIR_k(p_bar).
  double beta = 0.0;
  /// Achieved max-min value 1/beta.
  double level = 0.0;
  /// Constraint used to scale the eigenvector (0-based).
  std::size_t n0 = 0;
  /// Active constraints at p_bar (0-based).
  std::vector<std::size_t> active_set;
  /// Constraints whose Perron root ties the maximum.
  std::vector<std::size_t> argmax_set;
  Vector sir;
  Vector rho_B;
  SolveDiagnostics diagnostics;
};

/// Scales the right Perron vector of B[n] so that c_n^T p = P_n.
inline Vector scale_to_constraint(const Vector& x, const ConstraintPolytope& poly, std::size_t n) {
  const double used = poly.row(n).dot(x);
  return x * (poly.budgets()[static_cast<Eigen::Index>(n)] / used);
}

/// Power vector from the A[n] route: the eigenvector of A[n] for rho(A[n]) with
/// last entry 1. A[n] can be reducible while B[n] is not (when no member of
/// constraint n is interfered with); then the eigenvector comes from the first K
/// rows, (rho I - Gamma V) p = Gamma z.
inline Vector a_route_power(const ExtendedMatrices& ext, std::size_t n, const SolverConfig& cfg = {}) {
  const Matrix& a = ext.A.at(n);
  const auto k = a.rows() - 1;
  if (is_irreducible(a)) {
    const auto triple = perron(a, cfg.perron);
    return triple.x.head(k) / triple.x[k];
  }
  const double rho = spectral_radius(a, cfg.perron);
  const Matrix shifted = rho * Matrix::Identity(k, k) - a.topLeftCorner(k, k);
  return shifted.partialPivLu().solve(a.topRightCorner(k, 1));
}

/// Max-min SIR-balanced power allocation via the Perron roots of B[n].
inline MaxMinSolution solve_maxmin(const NetworkModel& model, const ConstraintPolytope& poly,
                                   const SolverConfig& cfg = {}) {
  const ExtendedMatrices ext = build_extended(model, poly, cfg);
  const auto count = poly.constraints();

  MaxMinSolution sol;
  sol.rho_B = ext.rho_B;
  const double rho_max = ext.rho_B.maxCoeff();
  for (std::size_t n = 0; n < count; ++n)
    if (ext.rho_B[static_cast<Eigen::Index>(n)] >= rho_max * (1.0 - cfg.tol_active))
      sol.argmax_set.push_back(n);
  sol.n0 = sol.argmax_set.front();

  const PerronTriple& pt = ext.perron_B[sol.n0];
  sol.p_bar = scale_to_constraint(pt.x, poly, sol.n0);
  if (!(sol.p_bar.array() > 0.0).all())
    throw InternalInvariantViolation("solve_maxmin: balanced power vector is not positive");
  sol.beta = pt.rho;
  sol.level = 1.0 / sol.beta;
  sol.sir = sir(model, sol.p_bar);

  const Vector levels = constraint_levels(poly, sol.p_bar);
  for (std::size_t n = 0; n < count; ++n)
    if (levels[static_cast<Eigen::Index>(n)] >= 1.0 - cfg.tol_active) sol.active_set.push_back(n);

  auto& d = sol.diagnostics;
  const double pmax = sol.p_bar.maxCoeff();
  d.eigen_residual =
      (ext.B[sol.n0] * sol.p_bar - sol.beta * sol.p_bar).cwiseAbs().maxCoeff() / pmax;
  const auto k = sol.p_bar.size();
  Vector ext_p(k + 1);
  ext_p << sol.p_bar, 1.0;
  d.a_route_residual = (ext.A[sol.n0] * ext_p - sol.beta * ext_p).cwiseAbs().maxCoeff() /
                       std::max(pmax, 1.0);
  const Vector inverse_ratio = model.targets().cwiseQuotient(sol.sir);
  d.balance_spread = (inverse_ratio.array() - sol.beta).abs().maxCoeff() / sol.beta;
  d.max_constraint_level = levels.maxCoeff();
  for (const auto& t : ext.perron_B) d.perron_iterations += t.iterations;
  d.active_set_consistent = sol.active_set == sol.argmax_set;
  return sol;
}

/// Sum_{j>=0} M^j b for a nonnegative M with rho(M) < 1.
inline Vector neumann_series(const Matrix& m, const Vector& b, const SolverConfig& cfg = {}) {
  Vector sum = b;
  Vector term = b;
  for (std::size_t j = 1; j < cfg.neumann_max_terms; ++j) {
    term = m * term;
    sum += term;
    if (term.cwiseAbs().maxCoeff() < cfg.neumann_rel * sum.cwiseAbs().maxCoeff()) return sum;
  }
  throw NoConvergence("neumann series did not converge", sum, term.cwiseAbs().maxCoeff(),
                      cfg.neumann_max_terms);
}

/// p(t) = (I/t - Gamma V)^{-1} Gamma z, the fixed point with every
/// SIR_k/gamma_k equal to t. Requires rho(Gamma V) t < 1.
inline Vector closed_form_power(const NetworkModel& model, double t, const SolverConfig& cfg = {}) {
  if (!(t > 0.0)) throw DomainError("closed_form_power: threshold must be positive");
  const Matrix gv = model.scaled_gains();
  const double scaled = spectral_radius(gv, cfg.perron) * t;
  if (scaled >= 1.0)
    throw SpectralRadiusViolation("closed_form_power: rho(Gamma V) * t = " + std::to_string(scaled) +
                                      " >= 1",
                                  scaled);
  return neumann_series(t * gv, t * model.scaled_noise(), cfg);
}

struct FeasibilityResult {
  bool feasible = false;
  double max_rho = 0.0;
  /// Max-min power vector for the tested targets; meets every target when feasible.
  std::optional<Vector> witness;
};

/// SIR targets gamma are achievable within P iff max_n rho(B[n]) <= 1.
inline FeasibilityResult feasible(const NetworkModel& model, const ConstraintPolytope& poly,
                                  const Vector& gamma, const SolverConfig& cfg = {}) {
  const NetworkModel target_model = model.with_targets(gamma);
  const MaxMinSolution sol = solve_maxmin(target_model, poly, cfg);
  FeasibilityResult r;
  r.max_rho = sol.rho_B.maxCoeff();
  r.feasible = r.max_rho <= 1.0;
  if (r.feasible) r.witness = sol.p_bar;
  return r;
}

}  // namespace sirbal
