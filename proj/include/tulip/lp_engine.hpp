// SPDX-License-Identifier: Apache-2.0
//
// Bounded-variable simplex over a dense basis inverse.
//
// Each row i is turned into a logical column t_i with a_i x - t_i = 0, so
// every constraint becomes a bound on t_i. Columns 0..n-1 are structural,
// n..n+m-1 are the logicals. A warm basis that was dual feasible for the
// previous bounds (branching) or that misses the logicals of appended rows
// (cutting planes) is repaired by the dual simplex; anything else goes
// through the composite primal phase 1.

#pragma once

#include "tulip/core_model.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <chrono>
#include <cstdint>
#include <vector>

namespace tulip {

enum class LpStatus : std::uint8_t { optimal, infeasible, unbounded, numerical_failure, time_limit };
const char* lp_status_name(LpStatus status);

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, free_zero };

/// Status of every column (structurals then logicals).
struct Basis {
  std::vector<VarStatus> status;

  bool empty() const { return status.empty(); }
  std::vector<int> basic_variables() const;
  friend bool operator==(const Basis&, const Basis&) = default;
};

struct LpOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Tolerance of the final residual check on the returned point.
  double feasibility_check_tol = 1e-7;
  int refactor_interval = 50;
  /// Relative size of the cost shifts that break dual degeneracy.
  double cost_perturbation = 1e-6;
  long max_iterations = 500000;
  /// Checked every 64 pivots, so small problems always finish.
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  Eigen::VectorXd point;
  double objective = 0.0;
  Basis basis;
  /// Basic-variable index list in basis order (columns >= num_vars are logicals).
  std::vector<int> basic;
  /// One multiplier per row; nonnegative on >= rows, nonpositive on <= rows.
  Eigen::VectorXd row_duals;
  Eigen::VectorXd reduced_costs;
  long iterations = 0;
};

class LpSolver {
 public:
  explicit LpSolver(const LinearProgram& lp, LpOptions options = {});

  int num_vars() const { return n_; }
  int num_rows() const { return m_; }

  void add_row(const SparseRow& row, Sense sense, double rhs);
  void set_bounds(int var, double lower, double upper);
  double lower(int var) const { return lo_[var]; }
  double upper(int var) const { return up_[var]; }

  /// Solves with the current bounds. `warm` may come from this solver or from
  /// a solve of the same columns with fewer rows.
  LpSolution solve(const Basis* warm = nullptr);

 private:
  enum class Outcome { optimal, infeasible, unbounded, failure, time_limit };

  bool past_deadline() const;

  void append_row(const SparseRow& row, Sense sense, double rhs);
  bool install_basis(const Basis* warm);
  void slack_basis();
  bool refactor();
  bool factorize(double accuracy_tol);
  void ftran_in_place(Eigen::VectorXd& v) const;
  void btran_in_place(Eigen::VectorXd& v) const;
  bool pivot_to_basis();
  void compute_basic_values();
  void place_nonbasic(int j);
  void compute_duals(const Eigen::VectorXd& basic_costs);
  double column_dot(int j, const Eigen::VectorXd& y) const;
  void ftran(int j, Eigen::VectorXd& alpha) const;
  void pivot(int row, int entering, const Eigen::VectorXd& alpha);
  double primal_infeasibility(int j) const;
  bool primal_feasible() const;
  bool dual_feasible_after_flips();
  Outcome primal_simplex(bool phase_one);
  Outcome dual_simplex();
  Outcome dual_simplex_loop();
  Outcome run_from_current_basis();
  LpSolution make_solution(Outcome outcome);
  bool residual_ok() const;

  LpOptions opt_;
  int n_ = 0;
  int m_ = 0;
  // Structural columns in compressed form: (row, coefficient).
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> cost_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd up_;
  std::vector<SparseRow> rows_;

  std::vector<VarStatus> status_;
  std::vector<int> head_;  // basic column per basis position
  std::vector<int> pos_;   // basis position per column, -1 when nonbasic
  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd d_;
  // Basis inverse as an LU of the last refactored basis times the eta
  // matrices of the pivots since then.
  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;
  };
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  bool factor_valid_ = false;
  int updates_since_refactor_ = 0;
  long iterations_ = 0;
  bool bland_ = false;
};

/// One-shot convenience wrapper around LpSolver.
LpSolution solve_lp(const LinearProgram& lp, const Basis* warm_basis = nullptr,
                    const LpOptions& options = {});

}  // namespace tulip
