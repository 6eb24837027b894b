// SPDX-License-Identifier: Apache-2.0
//
// Fast-forward scenario selection with unit-cost transport and
// nearest-neighbour probability redistribution.

#pragma once

#include <Eigen/Core>

#include <map>
#include <span>
#include <vector>

namespace tulip {

using DistanceMatrix = Eigen::MatrixXd;

struct Reduction {
  /// Original scenario indices in selection order.
  std::vector<int> selected;
  /// Probability of each selected scenario after redistribution.
  std::vector<double> new_probabilities;
  /// Excluded scenario -> selected scenario that absorbed its probability.
  std::map<int, int> assignment;
};

/// Throws std::invalid_argument on a non-square matrix, a negative entry or
/// a nonzero diagonal.
void validate_distance_matrix(const DistanceMatrix& d);

Reduction fast_forward_select(const DistanceMatrix& d, std::span<const double> p, int target);

/// Moves the probability of every unselected scenario to its nearest selected
/// one (ties to the lowest selected index).
Reduction redistribute(const DistanceMatrix& d, std::span<const double> p,
                       std::vector<int> selected);

/// sum over excluded j of p_j times the distance to the nearest selected scenario.
double transport_cost(const DistanceMatrix& d, std::span<const double> p,
                      std::span<const int> selected);

int reduction_fraction_to_target(int num_scenarios, double fraction);

}  // namespace tulip
