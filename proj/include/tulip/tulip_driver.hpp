// SPDX-License-Identifier: Apache-2.0
//
// The warm-start pipeline: reduce the scenario set, solve the root node of
// the reduced problem, and seed the full branch-and-cut with the cuts that
// were tight there.

#pragma once

#include "tulip/branch_and_cut.hpp"
#include "tulip/core_model.hpp"
#include "tulip/scenario_reduction.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tulip {

struct TwoStageProblem {
  std::vector<double> probabilities;
  /// Model over the given original scenarios with the given probabilities.
  std::function<MilpModel(std::span<const int>, std::span<const double>)> build_model;
  std::function<double(int, int)> distance;

  int num_scenarios() const { return static_cast<int>(probabilities.size()); }
  MilpModel build_full() const;
};

/// Looks up columns of a model by (block, role), where block 0 is the first
/// stage and block s + 1 belongs to original scenario s.
class ColumnMap {
 public:
  explicit ColumnMap(const MilpModel& model);
  /// -1 when the model has no such column.
  int column(int block, int role) const;

 private:
  std::map<std::pair<int, int>, int> index_;
};

/// Block of a column of `model`: 0 for the first stage, original scenario + 1 otherwise.
int column_block(const MilpModel& model, int column);

/// Rewrites a cut of `reduced` over the columns of the model behind `target`.
/// Empty when some column has no counterpart.
std::optional<Cut> transfer_cut(const Cut& cut, const MilpModel& reduced, const ColumnMap& target);

DistanceMatrix distance_matrix(const TwoStageProblem& problem);

SolveReport solve_direct(const TwoStageProblem& problem, const BncOptions& options = {});

SolveReport tulip_solve(const TwoStageProblem& problem, double fraction,
                        const BncOptions& options = {});

/// (role, value) of every integer first-stage column of an integral point.
std::vector<std::pair<int, double>> first_stage_values(const MilpModel& model,
                                                       const Eigen::VectorXd& point);

/// Full model with the listed first-stage columns fixed.
SolveReport fix_first_stage_and_resolve(const TwoStageProblem& problem,
                                        std::span<const std::pair<int, double>> first_stage,
                                        const BncOptions& options = {});

/// Solves the problem restricted to `selected` with the given probabilities,
/// fixes its first stage in the full problem and returns the full objective
/// (infinity when either solve fails to produce a solution).
double evaluate_selection(const TwoStageProblem& problem, std::span<const int> selected,
                          std::span<const double> probabilities, const BncOptions& options = {});

struct CurvePoint {
  int size = 0;
  double fast_forward = kInf;
  double random_min = kInf;
  double random_mean = kInf;
  double random_max = kInf;
};

/// Fixed-first-stage objectives for fast-forward selection and for `repeats`
/// uniform random subsets of each size (probabilities redistributed to the
/// nearest selected scenario).
std::vector<CurvePoint> convergence_curve(const TwoStageProblem& problem, std::span<const int> sizes,
                                          int repeats, std::uint64_t seed,
                                          const BncOptions& options = {});

}  // namespace tulip
