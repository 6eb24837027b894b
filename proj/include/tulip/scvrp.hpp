// SPDX-License-Identifier: Apache-2.0
//
// Stochastic capacitated vehicle routing with a single truck: the first
// stage fixes a route through every city, each scenario may add extra trips
// to the depot once its demands are known.

#pragma once

#include "tulip/core_model.hpp"
#include "tulip/tulip_driver.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tulip::scvrp {

/// Deterministic CVRP data as read from a TSPLIB file; node 0 is the depot.
struct BaseInstance {
  std::string name;
  Eigen::MatrixXd dist;
  double capacity = 0.0;
  /// Demand per node, depot entry 0.
  std::vector<double> demand;

  int num_nodes() const { return static_cast<int>(dist.rows()); }
};

struct Instance {
  std::string name;
  Eigen::MatrixXd dist;
  double capacity = 0.0;
  /// Payload: demand per node (depot entry 0) for each scenario.
  ScenarioSet<std::vector<double>> scenarios;

  int num_nodes() const { return static_cast<int>(dist.rows()); }
  int num_scenarios() const { return scenarios.size(); }
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Ordered pairs (i, j), i != j, numbered row by row.
class ArcIndex {
 public:
  explicit ArcIndex(int num_nodes) : n_(num_nodes) {}
  int num_nodes() const { return n_; }
  int size() const { return n_ * (n_ - 1); }
  int operator()(int i, int j) const { return i * (n_ - 1) + (j < i ? j : j - 1); }
  int tail(int a) const { return a / (n_ - 1); }
  int head(int a) const {
    const int i = tail(a);
    const int r = a % (n_ - 1);
    return r < i ? r : r + 1;
  }

 private:
  int n_;
};

/// Full two-stage model over every scenario of `inst`.
MilpModel build_scvrp_model(const Instance& inst);

/// Model restricted to `selected` scenarios (original indices) with the given
/// probabilities; scenario_ids of the result records the selection.
MilpModel build_scvrp_model(const Instance& inst, std::span<const int> selected,
                            std::span<const double> probabilities);

/// Two-stage view for the pipeline; scenario distance is scvrp_distance.
TwoStageProblem make_problem(const Instance& inst);

/// Column of x_ij (stage 0) or y^(s)_ij (local stage s >= 1).
int arc_column(const Instance& inst, int stage, int i, int j);

/// Subtour elimination on the first-stage arcs.
std::vector<Cut> separate_subtour(const ArcIndex& arcs, const Eigen::VectorXd& point,
                                  bool integral);

/// Capacity cuts on the arcs of local stage `stage`; `demand` is that
/// scenario's demand vector.
std::vector<Cut> separate_capacity(const ArcIndex& arcs, const Eigen::VectorXd& point,
                                   int stage, std::span<const double> demand, double capacity,
                                   bool integral);

/// Lognormal demands with mean B_i and variance alpha * B_i, equiprobable.
Instance generate_demands(const BaseInstance& base, double alpha, int num_scenarios,
                          std::uint64_t seed);

/// L1 distance between the demand vectors of scenarios i and j.
double scvrp_distance(const Instance& inst, int i, int j);

BaseInstance parse_tsplib_vrp(std::istream& in);
BaseInstance parse_tsplib_vrp_text(const std::string& text);

/// TSPLIB file extended with a SCENARIO_SECTION (see docs/formats.md).
Instance read_scvrp(std::istream& in);
void write_scvrp(std::ostream& out, const Instance& inst);

/// Depot trips of local stage `stage` in an integral solution, each a list of
/// customers in visiting order.
std::vector<std::vector<int>> extract_routes(const Instance& inst, const Eigen::VectorXd& point,
                                             int stage);

}  // namespace tulip::scvrp
