#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <random>

using namespace sirbal;
using fixtures::mat;
using fixtures::vec;

namespace {

// Largest root of lambda^2 - tr*lambda + det for a 2x2 matrix.
double root_2x2(const Matrix& m) {
  const double tr = m.trace(), det = m.determinant();
  return 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
}

double dense_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix random_irreducible(Eigen::Index n, std::mt19937_64& rng, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (u(rng) < density) m(i, j) = u(rng);
    if (is_irreducible(m)) return m;
  }
}

}  // namespace

TEST(Irreducible, Examples) {
  EXPECT_TRUE(is_irreducible(mat({{0, 1}, {1, 0}})));
  EXPECT_FALSE(is_irreducible(mat({{0, 1}, {0, 0}})));
  EXPECT_TRUE(is_irreducible(extended_a(fixtures::e2().model, fixtures::e2().poly, 1)));
  EXPECT_TRUE(is_irreducible(mat({{2}})));
  EXPECT_FALSE(is_irreducible(mat({{0}})));
  EXPECT_FALSE(is_irreducible(Matrix::Identity(3, 3)));
}

TEST(Irreducible, CycleAndBrokenCycle) {
  Matrix cycle = Matrix::Zero(50, 50);
  for (Eigen::Index i = 0; i < 50; ++i) cycle(i, (i + 1) % 50) = 1.0;
  EXPECT_TRUE(is_irreducible(cycle));
  cycle(49, 0) = 0.0;
  EXPECT_FALSE(is_irreducible(cycle));
  std::size_t count = 0;
  strongly_connected_components(cycle, &count);
  EXPECT_EQ(count, 50u);
}

TEST(Irreducible, RejectsInvalidInput) {
  EXPECT_THROW(is_irreducible(Matrix::Zero(2, 3)), DimensionError);
  EXPECT_THROW(is_irreducible(mat({{0, -1}, {1, 0}})), DomainError);
}

TEST(Perron, TwoByTwoExamples) {
  const auto a = perron(mat({{1, 0.5}, {1.5, 0}}));
  EXPECT_NEAR(a.rho, 1.5, 1e-10);
  EXPECT_NEAR(a.x[0] / a.x[1], 1.0, 1e-9);

  const auto b = perron(mat({{0, 0.3}, {0.8, 0.2}}));
  EXPECT_NEAR(b.rho, 0.6, 1e-10);
  EXPECT_NEAR(b.x[0] / b.x[1], 0.5, 1e-9);
  EXPECT_NEAR(b.y[0] / b.y[1], 4.0 / 3.0, 1e-9);

  const auto c = perron(mat({{0.05, 0.25}, {0.9, 0.1}}));
  EXPECT_NEAR(c.rho, 0.55, 1e-10);
  EXPECT_NEAR(c.x[1] / c.x[0], 2.0, 1e-9);
}

TEST(Perron, PeriodicMatrixConverges) {
  const auto t = perron(mat({{0, 1}, {1, 0}}));
  EXPECT_NEAR(t.rho, 1.0, 1e-12);
  Matrix cycle = Matrix::Zero(5, 5);
  for (Eigen::Index i = 0; i < 5; ++i) cycle(i, (i + 1) % 5) = 2.0;
  EXPECT_NEAR(perron(cycle).rho, 2.0, 1e-9);
}

TEST(Perron, Errors) {
  EXPECT_THROW(perron(mat({{0, 1}, {0, 0}})), NotIrreducible);
  EXPECT_THROW(perron(mat({{0, 1}, {1, 0}}), {0.0, 100}), DomainError);
  std::mt19937_64 rng(3);
  const Matrix m = random_irreducible(8, rng, 0.5);
  try {
    perron(m, {1e-14, 2});
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.last_iterate().size(), 8);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(SpectralRadius, ReducibleBlocks) {
  EXPECT_NEAR(spectral_radius(mat({{0.5, 1}, {0, 0.7}})), 0.7, 1e-15);
  EXPECT_EQ(spectral_radius(Matrix::Zero(3, 3)), 0.0);
  EXPECT_NEAR(spectral_radius(mat({{0, 1, 5}, {1, 0, 0}, {0, 0, 0}})), 1.0, 1e-10);
}

TEST(PerronProperties, MatchesIndependentEigensolver) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + trial % 11);
    const Matrix m = random_irreducible(n, rng, trial % 2 ? 0.35 : 0.8);
    const double oracle = n == 2 ? root_2x2(m) : dense_radius(m);
    EXPECT_NEAR(perron(m).rho, oracle, 1e-8) << "trial " << trial;
  }
}

TEST(PerronProperties, ScaleEquivariance) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_irreducible(2 + trial % 8, rng, 0.6);
    const auto base = perron(m);
    for (double c : {0.1, 1.0, 10.0}) {
      const auto scaled = perron(c * m);
      EXPECT_NEAR(scaled.rho, c * base.rho, 1e-10 * c * base.rho);
      EXPECT_LE((scaled.x - base.x).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(PerronProperties, NormalizationBoundsAndConsistency) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = random_irreducible(2 + trial % 11, rng, 0.5);
    const auto t = perron(m);
    EXPECT_NEAR(t.x.sum(), 1.0, 1e-14);
    EXPECT_NEAR(t.y.dot(t.x), 1.0, 1e-13);
    const Vector rows = m.rowwise().sum();
    EXPECT_LE(rows.minCoeff(), t.rho * (1 + 1e-10));
    EXPECT_GE(rows.maxCoeff(), t.rho * (1 - 1e-10));
    EXPECT_NEAR(t.y.dot(m * t.x), t.rho, 1e-8);
    EXPECT_LE(t.residual, 1e-9 * rows.maxCoeff());
    EXPECT_LE((t.y.transpose() * m - t.rho * t.y.transpose()).cwiseAbs().maxCoeff(),
              1e-8 * t.y.maxCoeff() * rows.maxCoeff());
  }
}
