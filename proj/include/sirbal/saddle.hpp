#pragma once

#include "sirbal/balancer.hpp"
#include "sirbal/error.hpp"
#include "sirbal/model.hpp"
#include "sirbal/projection.hpp"
#include "sirbal/spectral.hpp"
#include "sirbal/utility.hpp"
#include "sirbal/utility_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sirbal {

namespace detail {

inline void require_weights(const NetworkModel& model, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != model.links())
    throw DimensionError("weight vector length does not match the network");
  if (!(w.array() > 0.0).all()) throw DomainError("weights must be strictly positive");
}

}  // namespace detail

/// G(w, p) = sum_k w_k psi(gamma_k / SIR_k(p)), with psi(x) = -phi(1/x).
/// Equals -F(p, w).
inline double eval_G(const NetworkModel& model, const UtilitySpec& utility, const Vector& w,
                     const Vector& p) {
  detail::require_weights(model, w);
  const Vector inverse = model.targets().cwiseQuotient(sir(model, p));
  double g = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) g += w[k] * utility.psi(inverse[k]);
  return g;
}

/// dG/dw_k = psi(gamma_k / SIR_k(p)).
inline Vector eval_G_grad_weights(const NetworkModel& model, const UtilitySpec& utility,
                                  const Vector& p) {
  const Vector inverse = model.targets().cwiseQuotient(sir(model, p));
  Vector out(inverse.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = utility.psi(inverse[k]);
  return out;
}

/// Gradient of G(w, exp(s)) with respect to s = log p.
inline Vector eval_G_grad_log(const NetworkModel& model, const UtilitySpec& utility, const Vector& w,
                              const Vector& p) {
  detail::require_weights(model, w);
  const Vector interference = model.gains() * p + model.noise();
  const Vector inverse = model.targets().cwiseQuotient(sir(model, p));
  Vector b(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) b[k] = w[k] * utility.dpsi(inverse[k]) * inverse[k];
  return p.cwiseProduct(model.gains().transpose() * b.cwiseQuotient(interference)) - b;
}

/// sum_k w_k psi((B p)_k / p_k) - psi(rho(B)) for B = B[n] and w = y o x from its
/// Perron pair. Nonnegative; zero exactly when p is a positive multiple of x.
inline double perron_bound_gap(const NetworkModel& model, const ConstraintPolytope& poly,
                               const UtilitySpec& utility, std::size_t n, const Vector& p,
                               const SolverConfig& cfg = {}) {
  check_compatible(model, poly);
  if (static_cast<std::size_t>(p.size()) != model.links())
    throw DimensionError("power vector length does not match the network");
  if (!(p.array() > 0.0).all()) throw DomainError("perron_bound_gap: p must be positive");
  const Matrix b = extended_b(model, poly, n);
  if (!is_irreducible(b))
    throw NotIrreducible("perron_bound_gap: B[" + std::to_string(n) + "] is reducible", {n});
  const auto pt = perron(b, cfg.perron);
  const Vector w = pt.y.cwiseProduct(pt.x);
  const Vector ratios = (b * p).cwiseQuotient(p);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) sum += w[k] * utility.psi(ratios[k]);
  return sum - utility.psi(pt.rho);
}

/// The saddle-point weights: the convex hull of w(n) = y(n) o x(n) over
/// the active constraints n.
struct OptimalWeightSet {
  std::vector<WeightVector> generators;
  std::vector<std::size_t> constraints;

  /// Euclidean distance from w to the convex hull of the generators.
  double distance(const Vector& w) const {
    const auto m = generators.size();
    double best = std::numeric_limits<double>::infinity();
    // Enumerate supports; the hull has at most N vertices.
    for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (std::size_t{1} << i)) support.push_back(i);
      const auto s = static_cast<Eigen::Index>(support.size());
      // min |sum c_i g_i - w|^2 s.t. sum c_i = 1 via its KKT system.
      Matrix kkt = Matrix::Zero(s + 1, s + 1);
      Vector rhs(s + 1);
      for (Eigen::Index i = 0; i < s; ++i) {
        const Vector& gi = generators[support[static_cast<std::size_t>(i)]].values();
        for (Eigen::Index j = 0; j < s; ++j)
          kkt(i, j) = gi.dot(generators[support[static_cast<std::size_t>(j)]].values());
        kkt(i, s) = 1.0;
        kkt(s, i) = 1.0;
        rhs[i] = gi.dot(w);
      }
      rhs[s] = 1.0;
      const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      if ((sol.head(s).array() < -1e-12).any()) continue;
      Vector point = Vector::Zero(w.size());
      for (Eigen::Index i = 0; i < s; ++i)
        point += sol[i] * generators[support[static_cast<std::size_t>(i)]].values();
      best = std::min(best, (point - w).norm());
    }
    return best;
  }
};

inline OptimalWeightSet optimal_weight_set(const NetworkModel& model, const ConstraintPolytope& poly,
                                           const SolverConfig& cfg = {}) {
  const MaxMinSolution sol = solve_maxmin(model, poly, cfg);
  OptimalWeightSet set;
  for (auto n : sol.active_set) {
    const auto pt = perron(extended_b(model, poly, n), cfg.perron);
    set.generators.push_back(WeightVector::normalized(pt.y.cwiseProduct(pt.x)));
    set.constraints.push_back(n);
  }
  return set;
}

struct SaddleConfig {
  /// Step size alpha_t = step0 / sqrt(t + 1), divided by x psi'(x) at the
  /// largest gamma_k / SIR_k of the current iterate.
  double step0 = 2.0;
  std::size_t max_iter = 50000;
  /// With a reference: stop when |p - p_ref|_inf / |p_ref|_inf < primal_tol
  /// and both stationarity measures are below settle_tol.
  double primal_tol = 1e-3;
  double settle_tol = 1e-4;
  /// Without a reference: stop when both stationarity measures and the
  /// Perron-bound gap fall below grad_tol.
  double grad_tol = 1e-8;
  double w_floor = 1e-9;
  double floor_factor = 1e-12;
  bool record_trace = true;
  DykstraOptions dykstra{};
  SolverConfig solver{};
};

struct SaddleTraceRow {
  std::size_t iterate = 0;
  double g_value = 0.0;
  /// Relative distance to the reference, or primal stationarity when there is none.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct SaddleResult {
  Vector w;
  Vector p;
  std::vector<SaddleTraceRow> trace;
  std::size_t iterations = 0;
  double primal_stationarity = 0.0;
  double dual_stationarity = 0.0;
};

/// Thrown when saddle_solve exhausts its budget; keeps the trace.
class SaddleNoConvergence : public NoConvergence {
 public:
  SaddleNoConvergence(const std::string& what, SaddleResult partial, double residual)
      : NoConvergence(what, partial.p, residual, partial.iterations), partial_(std::move(partial)) {}

  const SaddleResult& partial() const noexcept { return partial_; }

 private:
  SaddleResult partial_;
};

/// Simultaneous projected extragradient descent in s = log p and ascent in w
/// on G(w, exp(s)), with diminishing steps. `reference`, when given, is the
/// max-min power vector used as the stopping criterion.
inline SaddleResult saddle_solve(const NetworkModel& model, const ConstraintPolytope& poly,
                                 const UtilitySpec& utility, const SaddleConfig& cfg = {},
                                 const Vector* reference = nullptr,
                                 const Vector* start_w = nullptr, const Vector* start_p = nullptr) {
  check_compatible(model, poly);
  const auto k = static_cast<Eigen::Index>(model.links());
  for (std::size_t n = 0; n < poly.constraints(); ++n)
    if (!is_irreducible(extended_b(model, poly, n)))
      throw NotIrreducible("saddle_solve: B[" + std::to_string(n) + "] is reducible", {n});

  const double floor = cfg.floor_factor * poly.budgets().minCoeff();
  SaddleResult r;
  r.p = start_p ? project_to_polytope(*start_p, poly, floor) : equal_share_power(poly);
  r.w = start_w ? project_simplex(*start_w, cfg.w_floor)
                : Vector::Constant(k, 1.0 / static_cast<double>(k));
  const double ref_norm = reference ? reference->cwiseAbs().maxCoeff() : 1.0;

  const auto fail = [&](const char* why) {
    const double residual = r.trace.empty() ? r.primal_stationarity : r.trace.back().primal_residual;
    throw SaddleNoConvergence(std::string("saddle_solve: ") + why, std::move(r), residual);
  };
  const auto p_step = [&](const Vector& p, const Vector& grad_s, double step) {
    if (!grad_s.allFinite() || !(p + step * p.cwiseProduct(grad_s)).allFinite())
      fail("iteration diverged (non-finite gradient)");
    return detail::log_domain_step(p, -grad_s, step, poly, floor, cfg.dykstra);
  };
  const auto w_step = [&](const Vector& w, const Vector& grad_w, double step) {
    if (!grad_w.allFinite()) fail("iteration diverged (non-finite gradient)");
    return project_simplex(w + step * grad_w, cfg.w_floor);
  };

  for (std::size_t t = 0;; ++t) {
    r.iterations = t;
    const Vector grad_s = eval_G_grad_log(model, utility, r.w, r.p);
    const Vector grad_w = eval_G_grad_weights(model, utility, r.p);

    // Dividing steps by x psi'(x) at the worst ratio makes them invariant to the
    // scale of psi; the factor is 1 for the log utility.
    const double worst = model.targets().cwiseQuotient(sir(model, r.p)).maxCoeff();
    const double scale = worst * utility.dpsi(worst);

    const Vector p_unit = p_step(r.p, grad_s, 1.0 / scale);
    r.primal_stationarity = ((p_unit - r.p).cwiseQuotient(r.p)).cwiseAbs().maxCoeff();
    r.dual_stationarity = (w_step(r.w, grad_w, 1.0 / scale) - r.w).cwiseAbs().maxCoeff();
    const double primal_error =
        reference ? (r.p - *reference).cwiseAbs().maxCoeff() / ref_norm : r.primal_stationarity;

    if (cfg.record_trace)
      r.trace.push_back({t, r.w.dot(grad_w), primal_error, r.dual_stationarity});

    bool done = false;
    if (reference) {
      // p alone can pass near the reference while w is still moving, e.g. when
      // the start point is already within primal_tol of it.
      done = primal_error < cfg.primal_tol && r.primal_stationarity < cfg.settle_tol &&
             r.dual_stationarity < cfg.settle_tol;
    } else if (r.primal_stationarity < cfg.grad_tol && r.dual_stationarity < cfg.grad_tol) {
      const Vector levels = constraint_levels(poly, r.p);
      Eigen::Index n_est = 0;
      levels.maxCoeff(&n_est);
      done = perron_bound_gap(model, poly, utility, static_cast<std::size_t>(n_est), r.p,
                              cfg.solver) < cfg.grad_tol;
    }
    if (done) return r;
    if (t >= cfg.max_iter) break;

    // Extragradient: evaluate at a trial point, then step from the current one.
    const double step = cfg.step0 / std::sqrt(static_cast<double>(t) + 1.0) / scale;
    const Vector p_half = p_step(r.p, grad_s, step);
    const Vector w_half = w_step(r.w, grad_w, step);
    const Vector grad_s_half = eval_G_grad_log(model, utility, w_half, p_half);
    const Vector grad_w_half = eval_G_grad_weights(model, utility, p_half);
    Vector p_next = p_step(r.p, grad_s_half, step);
    r.w = w_step(r.w, grad_w_half, step);
    r.p = std::move(p_next);
  }
  fail("iteration limit reached");
  return r;
}

/// CSV with header iterate,G_value,primal_residual,dual_residual.
inline void write_trace_csv(const std::vector<SaddleTraceRow>& trace, std::ostream& out) {
  out << "iterate,G_value,primal_residual,dual_residual\n";
  for (const auto& row : trace)
    out << row.iterate << ',' << format_double(row.g_value) << ','
        << format_double(row.primal_residual) << ',' << format_double(row.dual_residual) << '\n';
}

}  // namespace sirbal
