// SPDX-License-Identifier: Apache-2.0
//
// Shortest-augmenting-path maximum flow on a small directed network.

#pragma once

#include <span>
#include <vector>

namespace tulip {

struct FlowArc {
  int from = 0;
  int to = 0;
  double capacity = 0.0;
};

struct MaxFlowResult {
  double value = 0.0;
  /// Flow on each input arc.
  std::vector<double> flow;
  /// Vertices reachable from the source in the final residual graph.
  std::vector<char> source_side;
  /// Complement of the vertices that reach the sink in the residual graph
  /// (the cut closest to the sink; contains the source).
  std::vector<char> sink_side;
};

/// Throws std::invalid_argument if source == sink, a vertex is out of range,
/// or a capacity is negative.
MaxFlowResult max_flow(int num_vertices, std::span<const FlowArc> arcs, int source, int sink);

/// Total capacity of the arcs leaving `side`.
double cut_capacity(std::span<const FlowArc> arcs, const std::vector<char>& side);

}  // namespace tulip
