// SPDX-License-Identifier: Apache-2.0

#include "tulip/scenario_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tulip {

void validate_distance_matrix(const DistanceMatrix& d) {
  if (d.rows() != d.cols()) throw std::invalid_argument("distance matrix is not square");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw std::invalid_argument("distance matrix has nonzero diagonal");
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!(d(i, j) >= 0.0)) throw std::invalid_argument("distance matrix has negative entry");
    }
  }
}

Reduction redistribute(const DistanceMatrix& d, std::span<const double> p,
                       std::vector<int> selected) {
  const int s = static_cast<int>(p.size());
  Reduction out;
  out.new_probabilities.assign(selected.size(), 0.0);
  std::vector<int> slot(s, -1);
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const int u = selected[k];
    if (u < 0 || u >= s || slot[u] >= 0) throw std::invalid_argument("invalid selected set");
    slot[u] = static_cast<int>(k);
    out.new_probabilities[k] += p[u];
  }
  for (int j = 0; j < s; ++j) {
    if (slot[j] >= 0) continue;
    int nearest = -1;
    for (int u : selected) {
      if (nearest < 0 || d(j, u) < d(j, nearest) || (d(j, u) == d(j, nearest) && u < nearest)) {
        nearest = u;
      }
    }
    out.assignment[j] = nearest;
    out.new_probabilities[slot[nearest]] += p[j];
  }
  out.selected = std::move(selected);
  return out;
}

Reduction fast_forward_select(const DistanceMatrix& d, std::span<const double> p, int target) {
  const int s = static_cast<int>(p.size());
  if (d.rows() != s) throw std::invalid_argument("distance matrix size differs from scenario count");
  validate_distance_matrix(d);
  if (target < 1 || target > s) {
    throw std::invalid_argument("reduction target " + std::to_string(target) + " outside 1.." +
                                std::to_string(s));
  }
  DistanceMatrix c = d;
  std::vector<char> chosen(s, 0);
  std::vector<int> selected;
  while (static_cast<int>(selected.size()) < target) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int u = 0; u < s; ++u) {
      if (chosen[u]) continue;
      double cost = 0.0;
      for (int j = 0; j < s; ++j) {
        if (!chosen[j] && j != u) cost += p[j] * c(j, u);
      }
      if (best < 0 || cost < best_cost - 1e-12 * std::max(1.0, std::abs(best_cost))) {
        best_cost = cost;
        best = u;
      }
    }
    chosen[best] = 1;
    selected.push_back(best);
    for (int j = 0; j < s; ++j) {
      for (int u = 0; u < s; ++u) c(j, u) = std::min(c(j, u), c(j, best));
    }
  }
  return redistribute(d, p, std::move(selected));
}

double transport_cost(const DistanceMatrix& d, std::span<const double> p,
                      std::span<const int> selected) {
  const int s = static_cast<int>(p.size());
  std::vector<char> in(s, 0);
  for (int u : selected) in[u] = 1;
  double total = 0.0;
  for (int j = 0; j < s; ++j) {
    if (in[j]) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (int u : selected) nearest = std::min(nearest, d(j, u));
    total += p[j] * nearest;
  }
  return total;
}

int reduction_fraction_to_target(int num_scenarios, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("reduction fraction must lie in (0,1]");
  }
  return std::max(1, static_cast<int>(std::lround(fraction * num_scenarios)));
}

}  // namespace tulip
