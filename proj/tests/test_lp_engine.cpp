// SPDX-License-Identifier: Apache-2.0

#include "oracles/lp_oracle.hpp"
#include "oracles/random_lp.hpp"
#include "tulip/lp_engine.hpp"

#include <gtest/gtest.h>

#include <random>

using tulip::LinearProgram;
using tulip::LpStatus;
using tulip::Sense;
using tulip::SparseRow;

namespace {

LinearProgram two_var(double c0, double c1, double hi0, double hi1) {
  LinearProgram lp(2);
  lp.objective << c0, c1;
  lp.upper << hi0, hi1;
  return lp;
}

void expect_dual_signs(const LinearProgram& lp, const tulip::LpSolution& sol) {
  for (int i = 0; i < lp.num_rows(); ++i) {
    if (lp.row_sense[i] == Sense::greater_equal) EXPECT_GE(sol.row_duals[i], -1e-9);
    if (lp.row_sense[i] == Sense::less_equal) EXPECT_LE(sol.row_duals[i], 1e-9);
  }
}

}  // namespace

TEST(LpEngine, SingleActiveBound) {
  LinearProgram lp(1);
  lp.objective << 1.0;
  lp.add_row(SparseRow({{0, 1.0}}), Sense::greater_equal, 1.0);
  const auto sol = tulip::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-9);
  EXPECT_NEAR(sol.point[0], 1.0, 1e-9);
}

TEST(LpEngine, SymmetricVertex) {
  auto lp = two_var(-1.0, -1.0, 1.0, 1.0);
  lp.add_row(SparseRow({{0, 1.0}, {1, 1.0}}), Sense::less_equal, 1.0);
  const auto sol = tulip::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.objective, -1.0, 1e-9);
}

TEST(LpEngine, ThreeRowVertex) {
  auto lp = two_var(-1.0, -2.0, tulip::kInf, tulip::kInf);
  lp.add_row(SparseRow({{0, 1.0}, {1, 1.0}}), Sense::less_equal, 3.0);
  lp.add_row(SparseRow({{0, 1.0}}), Sense::less_equal, 2.0);
  lp.add_row(SparseRow({{1, 1.0}}), Sense::less_equal, 2.0);
  const auto sol = tulip::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.point[0], 1.0, 1e-9);
  EXPECT_NEAR(sol.point[1], 2.0, 1e-9);
  EXPECT_NEAR(sol.objective, -5.0, 1e-9);
  expect_dual_signs(lp, sol);
  EXPECT_NEAR(oracle::lagrangian_bound(lp, sol.row_duals), -5.0, 1e-9);
}

TEST(LpEngine, DetectsInfeasible) {
  LinearProgram lp(2);
  lp.upper << 1.0, 1.0;
  lp.add_row(SparseRow({{0, 1.0}, {1, 1.0}}), Sense::greater_equal, 3.0);
  EXPECT_EQ(tulip::solve_lp(lp).status, LpStatus::infeasible);
}

TEST(LpEngine, DetectsUnbounded) {
  LinearProgram lp(2);
  lp.objective << -1.0, 0.0;
  lp.add_row(SparseRow({{0, 1.0}, {1, -1.0}}), Sense::less_equal, 1.0);
  EXPECT_EQ(tulip::solve_lp(lp).status, LpStatus::unbounded);
}

TEST(LpEngine, FreeVariableAndEquality) {
  LinearProgram lp(2);
  lp.objective << 1.0, 1.0;
  lp.lower << -tulip::kInf, 0.0;
  lp.add_row(SparseRow({{0, 1.0}, {1, 2.0}}), Sense::equal, 4.0);
  lp.add_row(SparseRow({{0, 1.0}}), Sense::greater_equal, -2.0);
  const auto sol = tulip::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.point[0], -2.0, 1e-9);
  EXPECT_NEAR(sol.point[1], 3.0, 1e-9);
  EXPECT_NEAR(sol.objective, 1.0, 1e-9);
}

TEST(LpEngine, RedundantEqualitiesAreHandled) {
  LinearProgram lp(3);
  lp.objective << 1.0, 2.0, 3.0;
  lp.upper << 5.0, 5.0, 5.0;
  lp.add_row(SparseRow({{0, 1.0}, {1, 1.0}, {2, 1.0}}), Sense::equal, 3.0);
  lp.add_row(SparseRow({{0, 2.0}, {1, 2.0}, {2, 2.0}}), Sense::equal, 6.0);
  lp.add_row(SparseRow({{1, 1.0}}), Sense::greater_equal, 1.0);
  const auto sol = tulip::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.objective, 4.0, 1e-9);
}

TEST(LpEngine, ResolveFromReturnedBasisTakesNoPivots) {
  std::mt19937_64 rng(11);
  int solved = 0;
  for (int t = 0; t < 200; ++t) {
    const auto lp = oracle::random_bounded_lp(rng);
    tulip::LpSolver solver(lp);
    const auto first = solver.solve();
    if (first.status != LpStatus::optimal) continue;
    ++solved;
    const auto again = solver.solve(&first.basis);
    ASSERT_EQ(again.status, LpStatus::optimal);
    EXPECT_EQ(again.iterations, 0);
    EXPECT_NEAR(again.objective, first.objective, 1e-9);
  }
  EXPECT_GT(solved, 50);
}

TEST(LpEngine, WarmStartAfterAddedRowsMatchesColdSolve) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    auto lp = oracle::random_bounded_lp(rng, 6, 4);
    tulip::LpSolver solver(lp);
    const auto first = solver.solve();
    if (first.status != LpStatus::optimal) continue;
    const auto extra = oracle::random_bounded_lp(rng, 6, 3);
    for (int i = 0; i < extra.num_rows(); ++i) {
      if (extra.rows[i].max_index() >= lp.num_vars) continue;
      lp.add_row(extra.rows[i], extra.row_sense[i], extra.rhs[i]);
      solver.add_row(extra.rows[i], extra.row_sense[i], extra.rhs[i]);
    }
    const auto warm = solver.solve(&first.basis);
    const auto cold = tulip::solve_lp(lp);
    ASSERT_EQ(warm.status, cold.status) << "trial " << t;
    if (cold.status == LpStatus::optimal) {
      EXPECT_NEAR(warm.objective, cold.objective, 1e-6) << "trial " << t;
    }
  }
}

TEST(LpEngine, WarmStartAfterBoundChangeMatchesColdSolve) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    auto lp = oracle::random_bounded_lp(rng);
    tulip::LpSolver solver(lp);
    const auto first = solver.solve();
    if (first.status != LpStatus::optimal) continue;
    const int j = static_cast<int>(rng() % lp.num_vars);
    const double v = std::floor(first.point[j]);
    if (v >= lp.lower[j]) {
      lp.upper[j] = v;
    } else {
      lp.lower[j] = lp.upper[j];
    }
    solver.set_bounds(j, lp.lower[j], lp.upper[j]);
    const auto warm = solver.solve(&first.basis);
    const auto cold = tulip::solve_lp(lp);
    ASSERT_EQ(warm.status, cold.status) << "trial " << t;
    if (cold.status == LpStatus::optimal) {
      EXPECT_NEAR(warm.objective, cold.objective, 1e-6) << "trial " << t;
    }
  }
}

TEST(LpEngine, AgreesWithVertexEnumeration) {
  std::mt19937_64 rng(2024);
  int optimal = 0;
  for (int t = 0; t < 400; ++t) {
    const auto lp = oracle::random_bounded_lp(rng);
    const auto ref = oracle::enumerate_vertices(lp);
    const auto sol = tulip::solve_lp(lp);
    if (!ref.feasible) {
      EXPECT_EQ(sol.status, LpStatus::infeasible) << "trial " << t;
      continue;
    }
    ++optimal;
    ASSERT_EQ(sol.status, LpStatus::optimal) << "trial " << t;
    EXPECT_NEAR(sol.objective, ref.objective, 1e-6) << "trial " << t;
    EXPECT_TRUE(oracle::lp_point_feasible(lp, sol.point, 1e-7));
    EXPECT_NEAR(sol.objective, lp.objective.dot(sol.point), 1e-7 * (1 + std::abs(sol.objective)));
    expect_dual_signs(lp, sol);
    EXPECT_NEAR(oracle::lagrangian_bound(lp, sol.row_duals), sol.objective, 1e-6);
  }
  EXPECT_GT(optimal, 100);
}

TEST(LpEngine, RejectsMalformedInput) {
  LinearProgram lp(1);
  lp.add_row(SparseRow({{3, 1.0}}), Sense::less_equal, 1.0);
  EXPECT_THROW(tulip::LpSolver{lp}, tulip::StructuralError);
  LinearProgram ok(1);
  tulip::LpSolver solver(ok);
  EXPECT_THROW(solver.set_bounds(0, 2.0, 1.0), std::invalid_argument);
}

namespace {

/// Balanced transportation problem with random integer costs.
LinearProgram transportation(std::mt19937_64& rng, int sources, int sinks) {
  LinearProgram lp(sources * sinks);
  std::uniform_int_distribution<int> cost(1, 20);
  for (int j = 0; j < lp.num_vars; ++j) {
    lp.objective[j] = cost(rng);
    lp.upper[j] = tulip::kInf;
  }
  for (int i = 0; i < sources; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int k = 0; k < sinks; ++k) terms.emplace_back(i * sinks + k, 1.0);
    lp.add_row(SparseRow(std::move(terms)), Sense::equal, static_cast<double>(sinks));
  }
  for (int k = 0; k < sinks; ++k) {
    std::vector<std::pair<int, double>> terms;
    for (int i = 0; i < sources; ++i) terms.emplace_back(i * sinks + k, 1.0);
    lp.add_row(SparseRow(std::move(terms)), Sense::equal, static_cast<double>(sources));
  }
  return lp;
}

}  // namespace

TEST(LpEngine, LargerProblemsCloseTheDualityGap) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 5; ++t) {
    const auto lp = transportation(rng, 40 + t, 40);
    const auto sol = tulip::solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_GT(sol.iterations, 64);
    EXPECT_TRUE(oracle::lp_point_feasible(lp, sol.point, 1e-7));
    EXPECT_NEAR(oracle::lagrangian_bound(lp, sol.row_duals), sol.objective, 1e-6 * sol.objective);
  }
}

TEST(LpEngine, DeadlineStopsLongSolvesOnly) {
  std::mt19937_64 rng(5);
  tulip::LpOptions past;
  past.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  const auto big = tulip::solve_lp(transportation(rng, 40, 40), nullptr, past);
  EXPECT_EQ(big.status, LpStatus::time_limit);
  EXPECT_EQ(big.iterations, 63);
  auto small = two_var(-1.0, -1.0, 1.0, 1.0);
  small.add_row(SparseRow({{0, 1.0}, {1, 1.0}}), Sense::less_equal, 1.0);
  EXPECT_EQ(tulip::solve_lp(small, nullptr, past).status, LpStatus::optimal);
  EXPECT_STREQ(tulip::lp_status_name(LpStatus::time_limit), "time_limit");
}
