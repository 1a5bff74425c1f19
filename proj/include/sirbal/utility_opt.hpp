#pragma once

#include "sirbal/balancer.hpp"
#include "sirbal/error.hpp"
#include "sirbal/model.hpp"
#include "sirbal/projection.hpp"
#include "sirbal/spectral.hpp"
#include "sirbal/utility.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace sirbal {

/// Point of the feasible QoS region: q_k = phi(SIR_k(p) / gamma_k).
struct QosPoint {
  Vector q;
  UtilitySpec utility = UtilitySpec::log();
};

/// Strictly positive weights summing to one.
class WeightVector {
 public:
  /// Normalizes any positive vector onto the simplex.
  static WeightVector normalized(const Vector& raw) {
    if (raw.size() == 0 || !raw.allFinite() || !(raw.array() > 0.0).all())
      throw DomainError("weights must be positive and finite");
    return WeightVector(raw / raw.sum());
  }

  const Vector& values() const noexcept { return w_; }
  double operator[](Eigen::Index k) const { return w_[k]; }
  Eigen::Index size() const noexcept { return w_.size(); }

 private:
  explicit WeightVector(Vector w) : w_(std::move(w)) {}
  Vector w_;
};

inline QosPoint qos_of_power(const NetworkModel& model, const UtilitySpec& utility, const Vector& p) {
  const Vector ratios = sir_ratios(model, p);
  QosPoint out{Vector(ratios.size()), utility};
  for (Eigen::Index k = 0; k < ratios.size(); ++k) out.q[k] = utility.phi(ratios[k]);
  return out;
}

/// diag(g(q_1), ..., g(q_K)) as a vector.
inline Vector qos_scaling(const QosPoint& q) {
  Vector g(q.q.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = q.utility.g(q.q[k]);
  return g;
}

/// p(q) = (I - G(q) Gamma V)^{-1} G(q) Gamma z. Throws SpectralRadiusViolation
/// when rho(G(q) Gamma V) >= 1.
inline Vector power_of_qos(const NetworkModel& model, const QosPoint& q, const SolverConfig& cfg = {}) {
  if (static_cast<std::size_t>(q.q.size()) != model.links())
    throw DimensionError("QoS vector length does not match the network");
  const Vector scaling = qos_scaling(q);
  const Matrix m = scaling.asDiagonal() * model.scaled_gains();
  const double rho = spectral_radius(m, cfg.perron);
  if (rho >= 1.0)
    throw SpectralRadiusViolation("power_of_qos: rho(G(q) Gamma V) = " + std::to_string(rho) +
                                      " >= 1, q is outside the feasible QoS region",
                                  rho);
  return neumann_series(m, scaling.cwiseProduct(model.scaled_noise()), cfg);
}

/// lambda_n(q) = rho(G(q) B[n]).
inline double lambda_n(const NetworkModel& model, const ConstraintPolytope& poly, const QosPoint& q,
                       std::size_t n, const SolverConfig& cfg = {}) {
  check_compatible(model, poly);
  const Matrix gb = qos_scaling(q).asDiagonal() * extended_b(model, poly, n);
  if (!is_irreducible(gb))
    throw NotIrreducible("lambda_n: B[" + std::to_string(n) + "] is reducible", {n});
  return perron(gb, cfg.perron).rho;
}

inline Vector lambdas(const NetworkModel& model, const ConstraintPolytope& poly, const QosPoint& q,
                      const SolverConfig& cfg = {}) {
  Vector out(static_cast<Eigen::Index>(poly.constraints()));
  for (std::size_t n = 0; n < poly.constraints(); ++n)
    out[static_cast<Eigen::Index>(n)] = lambda_n(model, poly, q, n, cfg);
  return out;
}

/// Weights that make the boundary point q the maximizer of the aggregate utility:
/// w proportional to u(q) o y o x, with u_k = g'(q_k)/g(q_k) and (x, y) the
/// Perron pair of G(q) B[n0], n0 = argmax_n lambda_n(q).
inline WeightVector weights_for_boundary(const NetworkModel& model, const ConstraintPolytope& poly,
                                         const QosPoint& q, const SolverConfig& cfg = {},
                                         double boundary_tol = 1e-6) {
  check_compatible(model, poly);
  const Vector scaling = qos_scaling(q);
  double best = -1.0;
  PerronTriple pt;
  for (std::size_t n = 0; n < poly.constraints(); ++n) {
    const Matrix gb = scaling.asDiagonal() * extended_b(model, poly, n);
    if (!is_irreducible(gb))
      throw NotIrreducible("weights_for_boundary: B[" + std::to_string(n) + "] is reducible", {n});
    auto t = perron(gb, cfg.perron);
    if (t.rho > best) {
      best = t.rho;
      pt = std::move(t);
    }
  }
  if (std::abs(best - 1.0) > boundary_tol)
    throw NotOnBoundary("weights_for_boundary: max lambda_n(q) = " + std::to_string(best), best);
  Vector u(q.q.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = q.utility.dlog_g(q.q[k]);
  return WeightVector::normalized(u.cwiseProduct(pt.y).cwiseProduct(pt.x));
}

/// w proportional to y o x for the Perron pair of B[n0]; independent of the utility.
inline WeightVector maxmin_weights(const NetworkModel& model, const ConstraintPolytope& poly,
                                   const SolverConfig& cfg = {}) {
  const auto ext = build_extended(model, poly, cfg);
  const double rho_max = ext.rho_B.maxCoeff();
  std::size_t n0 = 0;
  while (ext.rho_B[static_cast<Eigen::Index>(n0)] < rho_max * (1.0 - cfg.tol_active)) ++n0;
  const auto& pt = ext.perron_B[n0];
  return WeightVector::normalized(pt.y.cwiseProduct(pt.x));
}

/// F(p, w) = sum_k w_k phi(SIR_k(p) / gamma_k).
inline double aggregate_utility(const NetworkModel& model, const UtilitySpec& utility,
                                const Vector& w, const Vector& p) {
  const Vector ratios = sir_ratios(model, p);
  double f = 0.0;
  for (Eigen::Index k = 0; k < ratios.size(); ++k) f += w[k] * utility.phi(ratios[k]);
  return f;
}

/// Gradient of F(exp(s), w) with respect to s = log p.
inline Vector aggregate_utility_grad_log(const NetworkModel& model, const UtilitySpec& utility,
                                         const Vector& w, const Vector& p) {
  const Vector interference = model.gains() * p + model.noise();
  const Vector ratios = sir_ratios(model, p);
  Vector a(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k)
    a[k] = w[k] * utility.dphi(ratios[k]) * ratios[k];
  const Vector coupling = model.gains().transpose() * a.cwiseQuotient(interference);
  return a - p.cwiseProduct(coupling);
}

struct AscentConfig {
  /// Stop when the max-norm of the projected log-domain step is below this.
  double grad_tol = 1e-9;
  std::size_t max_iter = 200000;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  std::size_t max_backtracks = 80;
  /// p_floor = floor_factor * min(p_hat).
  double floor_factor = 1e-12;
  DykstraOptions dykstra{};
};

struct AscentResult {
  Vector p;
  double value = 0.0;
  double stationarity = 0.0;
  std::size_t iterations = 0;
};

/// A point of P with c_n^T p <= P_n for all n: each link takes the smallest
/// equal share of the budgets it belongs to.
inline Vector equal_share_power(const ConstraintPolytope& poly) {
  const Matrix& c = poly.incidence();
  const Vector members = c.rowwise().sum();
  Vector p(c.cols());
  for (Eigen::Index k = 0; k < c.cols(); ++k) {
    double share = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < c.rows(); ++n)
      if (c(n, k) == 1.0) share = std::min(share, poly.budgets()[n] / members[n]);
    p[k] = share;
  }
  return p;
}

namespace detail {

// One projected step in log-power coordinates: x = Proj(p + step * p o dir),
// projected in the metric weighted by p so that u = x / p is the Euclidean variable.
inline Vector log_domain_step(const Vector& p, const Vector& dir, double step,
                              const ConstraintPolytope& poly, double floor,
                              const DykstraOptions& dykstra) {
  return project_to_polytope(p + step * p.cwiseProduct(dir), poly, floor, p, dykstra);
}

}  // namespace detail

/// p* = argmax over P_+ of F(p, w), by projected gradient ascent on s = log p
/// with Armijo backtracking. Throws NoConvergence carrying the last iterate.
inline AscentResult maximize_F(const NetworkModel& model, const ConstraintPolytope& poly,
                               const UtilitySpec& utility, const WeightVector& weights,
                               const AscentConfig& cfg = {}, const Vector* start = nullptr) {
  check_compatible(model, poly);
  const Vector& w = weights.values();
  if (static_cast<std::size_t>(w.size()) != model.links())
    throw DimensionError("weight vector length does not match the network");
  const double floor = cfg.floor_factor * poly.budgets().minCoeff();

  AscentResult r;
  r.p = start ? project_to_polytope(*start, poly, floor) : equal_share_power(poly);
  r.value = aggregate_utility(model, utility, w, r.p);
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    r.iterations = it;
    const Vector grad = aggregate_utility_grad_log(model, utility, w, r.p);
    const Vector full = detail::log_domain_step(r.p, grad, 1.0, poly, floor, cfg.dykstra);
    r.stationarity = ((full - r.p).cwiseQuotient(r.p)).cwiseAbs().maxCoeff();
    if (r.stationarity < cfg.grad_tol) return r;

    double step = cfg.initial_step;
    bool accepted = false;
    for (std::size_t bt = 0; bt < cfg.max_backtracks; ++bt, step *= cfg.backtrack) {
      const Vector trial =
          step == 1.0 ? full : detail::log_domain_step(r.p, grad, step, poly, floor, cfg.dykstra);
      const double predicted = grad.dot((trial - r.p).cwiseQuotient(r.p));
      const double value = aggregate_utility(model, utility, w, trial);
      // Rounding slack keeps the test meaningful once F stops changing in the last bits.
      if (value >= r.value + cfg.armijo * predicted - 16.0 * eps * std::abs(r.value)) {
        r.p = trial;
        r.value = value;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw NoConvergence("maximize_F: line search failed", r.p, r.stationarity, it);
  }
  throw NoConvergence("maximize_F: iteration limit reached", r.p, r.stationarity, cfg.max_iter);
}

}  // namespace sirbal
