#pragma once

#include "sirbal/error.hpp"
#include "sirbal/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace sirbal {

struct PerronOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
};

/// Perron root rho with right (x) and left (y) eigenvectors of an
/// irreducible nonnegative matrix. Normalized so that sum(x) = 1 and y^T x = 1.
struct PerronTriple {
  double rho = 0.0;
  Vector x;
  Vector y;
  /// max-norm of M x - rho x.
  double residual = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

inline void require_nonnegative_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError(std::string(who) + ": matrix must be square and non-empty, got " +
                         dims(m.rows(), m.cols()));
  if (!m.allFinite()) throw DomainError(std::string(who) + ": matrix has non-finite entries");
  if ((m.array() < 0.0).any()) throw DomainError(std::string(who) + ": matrix has negative entries");
}

}  // namespace detail

/// Strongly connected components of the digraph with an edge i->j whenever
/// m(i,j) > 0. Returns the component id of every node (iterative Tarjan).
inline std::vector<std::size_t> strongly_connected_components(const Matrix& m,
                                                              std::size_t* count = nullptr) {
  const auto n = static_cast<std::size_t>(m.rows());
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next neighbour)
  std::size_t next_index = 0, components = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next == 0 && index[v] == unvisited) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (next < n) {
        const std::size_t w = next++;
        if (!(m(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) > 0.0)) continue;
        if (index[w] == unvisited) {
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      const std::size_t done = v;
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = components;
        } while (w != done);
        ++components;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  if (count) *count = components;
  return comp;
}

/// True iff the positive-entry digraph of m is strongly connected.
/// A 1x1 matrix is irreducible iff its entry is nonzero.
inline bool is_irreducible(const Matrix& m) {
  detail::require_nonnegative_square(m, "is_irreducible");
  if (m.rows() == 1) return m(0, 0) > 0.0;
  std::size_t count = 0;
  strongly_connected_components(m, &count);
  return count == 1;
}

namespace detail {

struct PowerResult {
  Vector v;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Power iteration on m + shift*I. Convergence is certified on m itself by
// the Collatz-Wielandt bracket lo <= rho(m) <= hi.
inline PowerResult power_iterate(const Matrix& m, double shift, const PerronOptions& opt) {
  const auto n = m.rows();
  PowerResult r;
  r.v = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector mv(n);
  for (std::size_t it = 0; it <= opt.max_iter; ++it) {
    mv.noalias() = m * r.v;
    const Vector ratio = mv.cwiseQuotient(r.v);
    r.lo = ratio.minCoeff();
    r.hi = ratio.maxCoeff();
    r.iterations = it;
    if (r.hi - r.lo <= opt.tol * r.hi) {
      r.converged = true;
      return r;
    }
    if (it == opt.max_iter) break;
    Vector next = mv + shift * r.v;
    next /= next.sum();
    r.v = std::move(next);
  }
  return r;
}

}  // namespace detail

/// Perron root and eigenvectors by shifted power iteration.
///
/// Iterates on M + a I with a = max_row_sum / 2, which leaves the
/// eigenvectors unchanged and breaks the cyclic spectrum of periodic
/// matrices. Throws NotIrreducible or NoConvergence.
inline PerronTriple perron(const Matrix& m, const PerronOptions& opt = {}) {
  detail::require_nonnegative_square(m, "perron");
  if (!(opt.tol > 0.0)) throw DomainError("perron: tolerance must be positive");
  if (!is_irreducible(m)) throw NotIrreducible("perron: matrix is reducible");

  const auto n = m.rows();
  PerronTriple out;
  if (n == 1) {
    out.rho = m(0, 0);
    out.x = Vector::Ones(1);
    out.y = Vector::Ones(1);
    return out;
  }

  const Vector row_sums = m.rowwise().sum();
  const double max_row = row_sums.maxCoeff();
  const double min_row = row_sums.minCoeff();
  const double shift = 0.5 * max_row;

  const auto right = detail::power_iterate(m, shift, opt);
  if (!right.converged)
    throw NoConvergence("perron: right iteration did not converge", right.v, right.hi - right.lo,
                        right.iterations);
  const Matrix mt = m.transpose();
  const auto left = detail::power_iterate(mt, shift, opt);
  if (!left.converged)
    throw NoConvergence("perron: left iteration did not converge", left.v, left.hi - left.lo,
                        left.iterations);

  out.x = right.v / right.v.sum();
  out.y = left.v / left.v.dot(out.x);
  // y^T M x / y^T x, kept inside the certified bracket.
  const double lo = std::max(right.lo, left.lo);
  const double hi = std::min(right.hi, left.hi);
  out.rho = std::clamp(out.y.dot(m * out.x), std::min(lo, hi), std::max(lo, hi));
  out.residual = (m * out.x - out.rho * out.x).cwiseAbs().maxCoeff();
  out.iterations = std::max(right.iterations, left.iterations);

  const double slack = opt.tol * max_row + 4.0 * std::numeric_limits<double>::epsilon() * max_row;
  if (out.rho < min_row - slack || out.rho > max_row + slack)
    throw InternalInvariantViolation("perron: root outside the row-sum bounds");
  if (!(out.x.array() > 0.0).all() || !(out.y.array() > 0.0).all())
    throw InternalInvariantViolation("perron: eigenvector lost positivity");
  return out;
}

/// Spectral radius of any nonnegative square matrix: the largest Perron
/// root over its irreducible diagonal blocks (0 if there are none).
inline double spectral_radius(const Matrix& m, const PerronOptions& opt = {}) {
  detail::require_nonnegative_square(m, "spectral_radius");
  std::size_t count = 0;
  const auto comp = strongly_connected_components(m, &count);
  double rho = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < comp.size(); ++i)
      if (comp[i] == c) members.push_back(static_cast<Eigen::Index>(i));
    const auto size = static_cast<Eigen::Index>(members.size());
    Matrix block(size, size);
    for (Eigen::Index a = 0; a < size; ++a)
      for (Eigen::Index b = 0; b < size; ++b) block(a, b) = m(members[a], members[b]);
    if (size == 1) {
      rho = std::max(rho, block(0, 0));
    } else {
      rho = std::max(rho, perron(block, opt).rho);
    }
  }
  return rho;
}

}  // namespace sirbal
