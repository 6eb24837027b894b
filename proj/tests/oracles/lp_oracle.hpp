// SPDX-License-Identifier: Apache-2.0
//
// Brute-force LP reference: every vertex of a bounded polyhedron is the
// solution of some square system made of active rows and active variable
// bounds, so enumerating those systems finds the optimum.

#pragma once

#include "tulip/core_model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

struct LpReference {
  bool feasible = false;
  double objective = 0.0;
  Eigen::VectorXd point;
};

inline bool lp_point_feasible(const tulip::LinearProgram& lp, const Eigen::VectorXd& x,
                              double tol) {
  for (int j = 0; j < lp.num_vars; ++j) {
    if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    const double a = tulip::evaluate_row(lp.rows[i], x);
    switch (lp.row_sense[i]) {
      case tulip::Sense::less_equal:
        if (a > lp.rhs[i] + tol) return false;
        break;
      case tulip::Sense::greater_equal:
        if (a < lp.rhs[i] - tol) return false;
        break;
      case tulip::Sense::equal:
        if (std::abs(a - lp.rhs[i]) > tol) return false;
        break;
    }
  }
  return true;
}

/// Requires finite bounds on every variable.
inline LpReference enumerate_vertices(const tulip::LinearProgram& lp) {
  const int n = lp.num_vars;
  const int m = lp.num_rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    const auto idx = lp.rows[i].indices();
    const auto val = lp.rows[i].values();
    for (std::size_t k = 0; k < idx.size(); ++k) a(i, idx[k]) = val[k];
  }
  LpReference best;
  // choice[j]: 0 at lower, 1 at upper, 2 free (determined by active rows)
  std::vector<int> choice(n, 0);
  std::vector<int> free_vars;
  std::vector<int> active;

  auto try_rows = [&](auto&& self, int next_row, int need) -> void {
    if (need == 0) {
      const int k = static_cast<int>(free_vars.size());
      Eigen::VectorXd x(n);
      for (int j = 0; j < n; ++j) x[j] = choice[j] == 1 ? lp.upper[j] : lp.lower[j];
      if (k > 0) {
        Eigen::MatrixXd sub(k, k);
        Eigen::VectorXd rhs(k);
        for (int r = 0; r < k; ++r) {
          const int i = active[r];
          double fixed = 0.0;
          for (int j = 0; j < n; ++j) {
            if (choice[j] != 2) fixed += a(i, j) * x[j];
          }
          rhs[r] = lp.rhs[i] - fixed;
          for (int c = 0; c < k; ++c) sub(r, c) = a(i, free_vars[c]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (lu.rank() < k) return;
        const Eigen::VectorXd z = lu.solve(rhs);
        for (int c = 0; c < k; ++c) x[free_vars[c]] = z[c];
      }
      if (!lp_point_feasible(lp, x, 1e-9)) return;
      const double obj = lp.objective.dot(x);
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.point = x;
      }
      return;
    }
    if (m - next_row < need) return;
    active.push_back(next_row);
    self(self, next_row + 1, need - 1);
    active.pop_back();
    self(self, next_row + 1, need);
  };

  auto try_vars = [&](auto&& self, int j) -> void {
    if (j == n) {
      try_rows(try_rows, 0, static_cast<int>(free_vars.size()));
      return;
    }
    const int options = lp.lower[j] == lp.upper[j] ? 1 : 3;
    for (int c = 0; c < options; ++c) {
      choice[j] = c;
      if (c == 2) free_vars.push_back(j);
      self(self, j + 1);
      if (c == 2) free_vars.pop_back();
    }
    choice[j] = 0;
  };
  try_vars(try_vars, 0);
  return best;
}

}  // namespace oracle
