#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace sirbal;
using fixtures::mat;
using fixtures::vec;

TEST(BuildExtended, E2Blocks) {
  const auto s = fixtures::e2();
  const auto ext = build_extended(s.model, s.poly);
  EXPECT_TRUE(ext.B[0].isApprox(mat({{0.1, 0.2}, {1.0, 0}}), 1e-15));
  EXPECT_TRUE(ext.B[1].isApprox(mat({{0, 0.3}, {0.8, 0.2}}), 1e-15));
  EXPECT_NEAR(ext.rho_B[0], 0.5, 1e-10);
  EXPECT_NEAR(ext.rho_B[1], 0.6, 1e-10);
  const Matrix a1 = mat({{0, 0.2, 0.1}, {0.8, 0, 0.2}, {0, 0.2, 0.1}});
  EXPECT_TRUE(ext.A[0].isApprox(a1, 1e-15));
}

TEST(BuildExtended, E1AndE3) {
  const auto e1 = fixtures::e1();
  const auto x1 = build_extended(e1.model, e1.poly);
  EXPECT_TRUE(x1.B[0].isApprox(mat({{1, 0.5}, {1.5, 0}}), 1e-15));
  EXPECT_NEAR(x1.rho_B[0], 1.5, 1e-10);
  EXPECT_NEAR(x1.rho_B[1], 1.5, 1e-10);

  const auto e3 = fixtures::e3();
  const auto x3 = build_extended(e3.model, e3.poly);
  ASSERT_EQ(x3.B.size(), 1u);
  EXPECT_TRUE(x3.B[0].isApprox(mat({{0.05, 0.25}, {0.9, 0.1}}), 1e-15));
  EXPECT_NEAR(x3.rho_B[0], 0.55, 1e-10);
}

TEST(BuildExtended, NamesEveryReducibleConstraint) {
  const auto s = fixtures::quiet();
  try {
    build_extended(s.model, s.poly);
    FAIL() << "expected NotIrreducible";
  } catch (const NotIrreducible& e) {
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{0, 1}));
  }
}

TEST(BuildExtended, SumConstraintAdmitsReducibleGains) {
  const NetworkModel m(Matrix::Zero(2, 2), vec({1, 1}), vec({1, 1}));
  const ConstraintPolytope sum(mat({{1, 1}}), vec({2}));
  const auto sol = solve_maxmin(m, sum);
  EXPECT_NEAR(sol.level, 1.0, 1e-9);
  EXPECT_TRUE(sol.p_bar.isApprox(vec({1, 1}), 1e-9));
  // Without interference the extra node of A[0] only feeds itself.
  const auto ext = build_extended(m, sum);
  EXPECT_FALSE(is_irreducible(ext.A[0]));
  EXPECT_NEAR(spectral_radius(ext.A[0]), ext.rho_B[0], 1e-12);
  EXPECT_TRUE(a_route_power(ext, 0).isApprox(vec({1, 1}), 1e-12));
}

TEST(SolveMaxmin, E1) {
  const auto s = fixtures::e1();
  const auto sol = solve_maxmin(s.model, s.poly);
  EXPECT_NEAR(sol.beta, 1.5, 1e-8);
  EXPECT_NEAR(sol.level, 2.0 / 3.0, 1e-8);
  EXPECT_LE((sol.p_bar - vec({1, 1})).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(sol.active_set, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(sol.argmax_set, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(sol.n0, 0u);
}

TEST(SolveMaxmin, E2) {
  const auto s = fixtures::e2();
  const auto sol = solve_maxmin(s.model, s.poly);
  EXPECT_NEAR(sol.beta, 0.6, 1e-8);
  EXPECT_LE((sol.p_bar - vec({0.5, 1})).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(sol.active_set, (std::vector<std::size_t>{1}));
  EXPECT_EQ(sol.n0, 1u);
  EXPECT_TRUE(sol.diagnostics.active_set_consistent);
  EXPECT_LE(sol.diagnostics.a_route_residual, 1e-8);
}

TEST(SolveMaxmin, E3) {
  const auto s = fixtures::e3();
  const auto sol = solve_maxmin(s.model, s.poly);
  EXPECT_NEAR(sol.beta, 0.55, 1e-8);
  EXPECT_LE((sol.p_bar - vec({2.0 / 3, 4.0 / 3})).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(sol.active_set, (std::vector<std::size_t>{0}));
}

TEST(SolveMaxmin, FastOnDeskScale) {
  for (const auto& s : {fixtures::e1(), fixtures::e2(), fixtures::e3()}) {
    const auto t0 = std::chrono::steady_clock::now();
    solve_maxmin(s.model, s.poly);
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
    EXPECT_LT(ms.count(), 10.0);
  }
}

TEST(ClosedFormPower, Examples) {
  const NetworkModel quiet(Matrix::Zero(2, 2), vec({1, 2}), vec({1, 1}));
  EXPECT_TRUE(closed_form_power(quiet, 0.5).isApprox(vec({0.5, 1.0}), 1e-14));
  EXPECT_LE((closed_form_power(fixtures::e2().model, 1 / 0.6) - vec({0.5, 1})).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LE((closed_form_power(fixtures::e1().model, 2.0 / 3.0) - vec({1, 1})).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(ClosedFormPower, RadiusViolation) {
  // rho(Gamma V) = 0.5 for E1, so t = 2 sits exactly on the boundary.
  try {
    closed_form_power(fixtures::e1().model, 2.0);
    FAIL() << "expected SpectralRadiusViolation";
  } catch (const SpectralRadiusViolation& e) {
    EXPECT_NEAR(e.scaled_radius(), 1.0, 1e-9);
  }
  EXPECT_THROW(closed_form_power(fixtures::e1().model, 0.0), DomainError);
}

TEST(ClosedFormPower, MatchesDirectSolve) {
  for (std::size_t i = 0; i < 30; ++i) {
    const auto s = fixtures::random_scenario(i);
    const Matrix gv = s.model.scaled_gains();
    const double t = 0.5 / std::max(spectral_radius(gv), 1e-3);
    const auto k = gv.rows();
    const Vector direct =
        (Matrix::Identity(k, k) / t - gv).partialPivLu().solve(s.model.scaled_noise());
    EXPECT_LE(fixtures::rel_max_error(closed_form_power(s.model, t), direct), 1e-12);
  }
}

TEST(Feasible, Examples) {
  const auto s = fixtures::e2();
  const auto yes = feasible(s.model, s.poly, vec({1, 2}));
  EXPECT_TRUE(yes.feasible);
  EXPECT_NEAR(yes.max_rho, 0.6, 1e-10);
  ASSERT_TRUE(yes.witness.has_value());
  EXPECT_LE((*yes.witness - vec({0.5, 1})).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE((sir(s.model, *yes.witness).array() >= vec({1, 2}).array()).all());

  const auto no = feasible(s.model, s.poly, vec({2, 4}));
  EXPECT_FALSE(no.feasible);
  EXPECT_NEAR(no.max_rho, 1.2, 1e-9);
  EXPECT_FALSE(no.witness.has_value());

  const auto e1 = fixtures::e1();
  EXPECT_FALSE(feasible(e1.model, e1.poly, vec({1, 1})).feasible);
}

class RandomSuite : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { suite_ = new std::vector<Scenario>(fixtures::random_suite(60)); }
  static void TearDownTestSuite() {
    delete suite_;
    suite_ = nullptr;
  }
  static std::vector<Scenario>* suite_;
};
std::vector<Scenario>* RandomSuite::suite_ = nullptr;

TEST_F(RandomSuite, ExtendedRootsAgree) {
  for (const auto& s : *suite_) {
    const auto ext = build_extended(s.model, s.poly);
    for (std::size_t n = 0; n < ext.B.size(); ++n) {
      EXPECT_GE((ext.B[n] - s.model.scaled_gains()).minCoeff(), 0.0);
      const double rho_a = spectral_radius(ext.A[n]);
      EXPECT_NEAR(rho_a, ext.rho_B[static_cast<Eigen::Index>(n)], 1e-8);
      Eigen::EigenSolver<Matrix> es(ext.A[n], false);
      EXPECT_NEAR(rho_a, es.eigenvalues().cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST_F(RandomSuite, BalancedAndBoundary) {
  for (const auto& s : *suite_) {
    const auto sol = solve_maxmin(s.model, s.poly);
    const Vector ratios = sir_ratios(s.model, sol.p_bar);
    EXPECT_LE((ratios.maxCoeff() - ratios.minCoeff()) / ratios.maxCoeff(), 1e-6);
    EXPECT_NEAR(constraint_levels(s.poly, sol.p_bar).maxCoeff(), 1.0, 1e-8);
    EXPECT_NEAR(sol.beta, sol.rho_B.maxCoeff(), 1e-12);
    EXPECT_LE(sol.diagnostics.balance_spread, 1e-6);
    for (auto n : sol.active_set)
      EXPECT_NEAR(constraint_levels(s.poly, sol.p_bar)[static_cast<Eigen::Index>(n)], 1.0, 1e-7);
  }
}

TEST_F(RandomSuite, ARouteMatchesBRoute) {
  for (const auto& s : *suite_) {
    const auto ext = build_extended(s.model, s.poly);
    const auto sol = solve_maxmin(s.model, s.poly);
    for (auto n : sol.active_set)
      EXPECT_LE(fixtures::rel_max_error(a_route_power(ext, n), sol.p_bar), 1e-8);
  }
}

TEST_F(RandomSuite, NoFeasiblePointBeatsTheLevel) {
  std::mt19937_64 rng(29);
  for (const auto& s : *suite_) {
    const auto sol = solve_maxmin(s.model, s.poly);
    for (int i = 0; i < 500; ++i) {
      const Vector q = fixtures::random_feasible(s.poly, rng);
      EXPECT_LE(sir_ratios(s.model, q).minCoeff(), sol.level + 1e-9);
    }
  }
}

TEST_F(RandomSuite, FeasibilityFollowsLargestRoot) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& s = (*suite_)[i];
    const double rho = build_extended(s.model, s.poly).rho_B.maxCoeff();
    const double c = u(rng);
    // B[n] is linear in the targets, so scaling them scales every root.
    const auto r = feasible(s.model, s.poly, s.model.targets() * (c / rho));
    EXPECT_NEAR(r.max_rho, c, 1e-8 * c);
    EXPECT_EQ(r.feasible, c <= 1.0);
    if (r.feasible) {
      const Vector achieved = sir(s.model, *r.witness);
      EXPECT_TRUE((achieved.array() >= (s.model.targets() * (c / rho)).array() * (1 - 1e-9)).all());
    }
  }
}
