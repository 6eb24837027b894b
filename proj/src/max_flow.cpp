// SPDX-License-Identifier: Apache-2.0

#include "tulip/max_flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace tulip {

namespace {

constexpr double kResidualEps = 1e-12;

struct Residual {
  int to;
  int rev;
  double cap;
  int arc;  // input arc index, -1 for reverse edges
};

}  // namespace

MaxFlowResult max_flow(int num_vertices, std::span<const FlowArc> arcs, int source, int sink) {
  if (num_vertices <= 0 || source < 0 || sink < 0 || source >= num_vertices ||
      sink >= num_vertices) {
    throw std::invalid_argument("max_flow: terminal out of range");
  }
  if (source == sink) throw std::invalid_argument("max_flow: source equals sink");

  std::vector<std::vector<Residual>> g(num_vertices);
  std::vector<std::pair<int, int>> where(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const auto& arc = arcs[a];
    if (arc.from < 0 || arc.to < 0 || arc.from >= num_vertices || arc.to >= num_vertices) {
      throw std::invalid_argument("max_flow: arc endpoint out of range");
    }
    if (!(arc.capacity >= 0.0)) throw std::invalid_argument("max_flow: negative capacity");
    if (arc.from == arc.to) {
      where[a] = {-1, -1};
      continue;
    }
    const int fi = static_cast<int>(g[arc.from].size());
    const int bi = static_cast<int>(g[arc.to].size());
    g[arc.from].push_back({arc.to, bi, arc.capacity, static_cast<int>(a)});
    g[arc.to].push_back({arc.from, fi, 0.0, -1});
    where[a] = {arc.from, fi};
  }

  MaxFlowResult result;
  std::vector<std::pair<int, int>> parent(num_vertices);
  while (true) {
    std::fill(parent.begin(), parent.end(), std::pair<int, int>{-1, -1});
    parent[source] = {source, -1};
    std::deque<int> queue{source};
    while (!queue.empty() && parent[sink].first < 0) {
      const int v = queue.front();
      queue.pop_front();
      for (int e = 0; e < static_cast<int>(g[v].size()); ++e) {
        const auto& r = g[v][e];
        if (r.cap > kResidualEps && parent[r.to].first < 0) {
          parent[r.to] = {v, e};
          queue.push_back(r.to);
        }
      }
    }
    if (parent[sink].first < 0) break;
    double push = std::numeric_limits<double>::infinity();
    for (int v = sink; v != source; v = parent[v].first) {
      push = std::min(push, g[parent[v].first][parent[v].second].cap);
    }
    for (int v = sink; v != source; v = parent[v].first) {
      auto& r = g[parent[v].first][parent[v].second];
      r.cap -= push;
      g[r.to][r.rev].cap += push;
    }
    result.value += push;
  }

  result.flow.assign(arcs.size(), 0.0);
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    if (where[a].first < 0) continue;
    const auto& r = g[where[a].first][where[a].second];
    result.flow[a] = std::max(0.0, arcs[a].capacity - r.cap);
  }

  result.source_side.assign(num_vertices, 0);
  std::deque<int> queue{source};
  result.source_side[source] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const auto& r : g[v]) {
      if (r.cap > kResidualEps && !result.source_side[r.to]) {
        result.source_side[r.to] = 1;
        queue.push_back(r.to);
      }
    }
  }

  // u reaches the sink iff some residual edge u->w has w reaching the sink.
  std::vector<char> reaches(num_vertices, 0);
  reaches[sink] = 1;
  queue.assign(1, sink);
  while (!queue.empty()) {
    const int w = queue.front();
    queue.pop_front();
    for (const auto& back : g[w]) {
      const int u = back.to;
      if (!reaches[u] && g[u][back.rev].cap > kResidualEps) {
        reaches[u] = 1;
        queue.push_back(u);
      }
    }
  }
  result.sink_side.assign(num_vertices, 0);
  for (int v = 0; v < num_vertices; ++v) result.sink_side[v] = reaches[v] ? 0 : 1;
  return result;
}

double cut_capacity(std::span<const FlowArc> arcs, const std::vector<char>& side) {
  double total = 0.0;
  for (const auto& arc : arcs) {
    if (side[arc.from] && !side[arc.to]) total += arc.capacity;
  }
  return total;
}

}  // namespace tulip
