// SPDX-License-Identifier: Apache-2.0
//
// Two-stage stochastic Steiner forest with several connection types per
// edge. Installations bought in the first stage are available in every
// scenario; each scenario may buy more at its own prices.

#pragma once

#include "tulip/core_model.hpp"
#include "tulip/tulip_driver.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tulip::ssfp {

/// Requirements and prices of one stage (first stage or a scenario).
struct StageData {
  /// Terminal groups, each sorted ascending; the front vertex is the root.
  std::vector<std::vector<int>> groups;
  /// Usable connection types, sorted ascending.
  std::vector<int> types;
  /// cost(m, e) for every connection type m and edge e.
  Eigen::MatrixXd cost;

  int num_groups() const { return static_cast<int>(groups.size()); }
  int root(int k) const { return groups[static_cast<std::size_t>(k)].front(); }
};

struct Instance {
  std::string name;
  int num_vertices = 0;
  /// Undirected edges {u, v} with u < v. Edge e yields arcs 2e = (u, v) and 2e + 1 = (v, u).
  std::vector<std::array<int, 2>> edges;
  int num_types = 0;
  StageData first_stage;
  /// May be empty, which leaves the deterministic first-stage problem.
  ScenarioSet<StageData> scenarios;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_arcs() const { return 2 * num_edges(); }
  int num_scenarios() const { return scenarios.size(); }
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Sorts every group, drops duplicate vertices inside a group and sorts the
/// type lists, so that roots are the smallest terminals.
void normalize(Instance& inst);

/// The first-stage problem alone: same graph and first stage, no scenarios.
Instance deterministic_restriction(const Instance& inst);

/// Cut-based model over every scenario; connectivity is enforced by a lazy
/// separator per stage.
MilpModel build_ssfp_cut_model(const Instance& inst);
MilpModel build_ssfp_cut_model(const Instance& inst, std::span<const int> selected,
                               std::span<const double> probabilities);

/// Compact model with one arborescence flow per (root, terminal) pair.
MilpModel build_ssfp_flow_model(const Instance& inst);
MilpModel build_ssfp_flow_model(const Instance& inst, std::span<const int> selected,
                                std::span<const double> probabilities);

/// Column of x_{m,e} in `stage` (0 = first stage, s >= 1 = local scenario block)
/// of a model built by either builder.
int install_column(const Instance& inst, const MilpModel& model, int stage, int type, int edge);

/// Creep capacity added to every arc during separation.
inline constexpr double kCreep = 1e-6;
/// Violation a connectivity cut needs before it is returned.
inline constexpr double kConnectivityViolation = 1e-4;

/// Total installation cost of an integral point, per stage; index 0 is the
/// first stage, index s the extra cost of local scenario s (not weighted).
std::vector<double> stage_costs(const Instance& inst, const MilpModel& model,
                                const Eigen::VectorXd& point);

struct DistanceWeights {
  double cost = 1.0;
  double terminals = 0.0;
  double types = 0.0;
};

/// Throws std::invalid_argument unless the weights lie in [0, 1] and sum to 1 within 1e-9.
void validate_weights(const DistanceWeights& beta);

double cost_distance(const Instance& inst, int i, int j);
/// One-sided group matching distance from scenario i to j.
double terminal_distance(const StageData& a, const StageData& b);
double type_distance(const StageData& a, const StageData& b);
double ssfp_distance(const Instance& inst, int i, int j, const DistanceWeights& beta);

/// Two-stage view for the pipeline, built on the cut model or the flow model.
TwoStageProblem make_problem(const Instance& inst, const DistanceWeights& beta,
                             bool flow_model = false);

/// SteinLib graph plus optional scenario blocks (see docs/formats.md).
struct StpInstance {
  std::string name;
  int num_vertices = 0;
  std::vector<std::array<int, 2>> edges;
  std::vector<double> costs;
  std::vector<int> terminals;
  /// Payload: terminal groups of the scenario.
  ScenarioSet<std::vector<std::vector<int>>> scenarios;
};

StpInstance parse_stp(std::istream& in);
StpInstance parse_stp_text(const std::string& text);
void write_stp(std::ostream& out, const StpInstance& stp);

/// Two connection types (type 2 costs twice type 1), first stage serves the
/// groups of scenario 1, every scenario gains two random groups of five
/// vertices, usable types drawn from {1}, {2}, {1, 2}, second-stage prices
/// doubled. Throws std::invalid_argument for graphs with fewer than five
/// vertices or without scenarios.
Instance adapt_sstp_instance(const StpInstance& stp, std::uint64_t seed);

/// Scenario blocks drawn from the base terminal list when the file has none:
/// each scenario keeps a random half (at least two) of the terminals.
StpInstance add_random_scenarios(const StpInstance& stp, int num_scenarios, std::uint64_t seed);

/// Self-contained text form of an adapted instance (see docs/formats.md).
Instance read_ssfp(std::istream& in);
void write_ssfp(std::ostream& out, const Instance& inst);

/// Graph of the illustrative four-vertex example: vertices A, B, C, D are
/// 0..3; the first stage and scenario 1 connect {A, D}, scenario 2 connects
/// {A, B} with type 2 only.
Instance toy_instance(double second_probability);

}  // namespace tulip::ssfp
