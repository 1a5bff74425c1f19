#pragma once

#include "sirbal/balancer.hpp"
#include "sirbal/error.hpp"
#include "sirbal/model.hpp"
#include "sirbal/scenario.hpp"
#include "sirbal/spectral.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace sirbal {

enum class ConstraintKind { Individual, Sum, Mixed };

inline ConstraintKind parse_constraint_kind(const std::string& s) {
  if (s == "individual") return ConstraintKind::Individual;
  if (s == "sum") return ConstraintKind::Sum;
  if (s == "mixed") return ConstraintKind::Mixed;
  throw DomainError("unknown constraint kind '" + s + "' (expected individual, sum or mixed)");
}

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

struct GenerateOptions {
  std::size_t links = 4;
  std::size_t constraints = 4;
  std::uint64_t seed = 1;
  ConstraintKind kind = ConstraintKind::Individual;
  /// Probability that an off-diagonal gain is nonzero.
  double density = 1.0;
  /// Draw targets from U(0.5, 2) instead of all ones.
  bool random_targets = false;
  std::size_t max_retries = 100;
};

/// Random scenario whose every B[n] is irreducible. Off-diagonal gains are
/// U(0.01, 0.5/K), noise U(0.01, 0.2), budgets U(0.5, 2) per member link.
/// Deterministic per seed.
inline Scenario generate_scenario(const GenerateOptions& opt) {
  const auto k = static_cast<Eigen::Index>(opt.links);
  const auto n_rows = static_cast<Eigen::Index>(opt.constraints);
  if (k < 2) throw DomainError("generate: need at least 2 links");
  if (opt.kind == ConstraintKind::Individual && n_rows != k)
    throw DomainError("generate: individual constraints need N = K");
  if (opt.kind == ConstraintKind::Sum && n_rows != 1)
    throw DomainError("generate: a sum constraint needs N = 1");
  if (n_rows < 1) throw DomainError("generate: need at least one constraint");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> gain(0.01, 0.5 / static_cast<double>(k));
  std::uniform_real_distribution<double> noise(0.01, 0.2);
  std::uniform_real_distribution<double> budget(0.5, 2.0);
  std::uniform_real_distribution<double> target(0.5, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t attempt = 0; attempt < opt.max_retries; ++attempt) {
    Matrix v = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        if (i != j && unit(rng) < opt.density) v(i, j) = gain(rng);
    Vector z(k);
    for (Eigen::Index i = 0; i < k; ++i) z[i] = noise(rng);
    Vector gamma = Vector::Ones(k);
    if (opt.random_targets)
      for (Eigen::Index i = 0; i < k; ++i) gamma[i] = target(rng);

    Matrix c = Matrix::Zero(n_rows, k);
    switch (opt.kind) {
      case ConstraintKind::Individual:
        c.setIdentity();
        break;
      case ConstraintKind::Sum:
        c.setOnes();
        break;
      case ConstraintKind::Mixed:
        for (Eigen::Index n = 0; n < n_rows; ++n)
          for (Eigen::Index j = 0; j < k; ++j) c(n, j) = unit(rng) < 0.5 ? 1.0 : 0.0;
        for (Eigen::Index j = 0; j < k; ++j)
          if (c.col(j).sum() == 0.0)
            c(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n_rows)), j) = 1.0;
        for (Eigen::Index n = 0; n < n_rows; ++n)
          if (c.row(n).sum() == 0.0)
            c(n, static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(k))) = 1.0;
        break;
    }
    Vector p_hat(n_rows);
    for (Eigen::Index n = 0; n < n_rows; ++n) p_hat[n] = budget(rng) * c.row(n).sum();

    Scenario s{NetworkModel(std::move(v), std::move(z), std::move(gamma)),
               ConstraintPolytope(std::move(c), std::move(p_hat)), UtilitySpec::log()};
    bool irreducible = true;
    for (std::size_t n = 0; n < opt.constraints && irreducible; ++n)
      irreducible = is_irreducible(extended_b(s.model, s.poly, n));
    if (irreducible) return s;
  }
  throw GenerationFailed("generate: no irreducible scenario after " +
                         std::to_string(opt.max_retries) + " attempts");
}

}  // namespace sirbal
