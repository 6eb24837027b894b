// SPDX-License-Identifier: Apache-2.0

#include "tulip/scvrp.hpp"

#include "tulip/max_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace tulip::scvrp {

void Instance::validate() const {
  const int n = num_nodes();
  if (n < 2 || dist.cols() != n) throw std::invalid_argument("SCVRP needs a square matrix over >= 2 nodes");
  if (!(capacity > 0.0)) throw std::invalid_argument("SCVRP capacity must be positive");
  for (int i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0) throw std::invalid_argument("SCVRP distance diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (i != j && !(dist(i, j) > 0.0)) throw std::invalid_argument("SCVRP distances must be positive");
      if (std::abs(dist(i, j) - dist(j, i)) > 1e-9) {
        throw std::invalid_argument("SCVRP distances must be symmetric");
      }
    }
  }
  validate_probabilities(scenarios.probabilities);
  if (static_cast<int>(scenarios.payload.size()) != scenarios.size()) {
    throw std::invalid_argument("SCVRP scenario payload count differs from probabilities");
  }
  for (const auto& b : scenarios.payload) {
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("SCVRP demand vector has wrong length");
    if (b[0] != 0.0) throw std::invalid_argument("SCVRP depot demand must be zero");
    for (int i = 1; i < n; ++i) {
      if (!(b[i] > 0.0)) throw std::invalid_argument("SCVRP demands must be positive");
      if (b[i] > capacity) throw std::invalid_argument("SCVRP demand exceeds capacity");
    }
  }
}

int arc_column(const Instance& inst, int stage, int i, int j) {
  const ArcIndex arcs(inst.num_nodes());
  return stage * arcs.size() + arcs(i, j);
}

namespace {

constexpr double kSupportEps = 1e-9;

std::vector<std::vector<int>> customer_components(const ArcIndex& arcs, const Eigen::VectorXd& point,
                                                  int offset, double threshold) {
  const int n = arcs.num_nodes();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      if (i != j && point[offset + arcs(i, j)] > threshold) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> comps(n);
  for (int v = 1; v < n; ++v) comps[find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& c : comps) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  return out;
}

/// Source sides of minimum v -> depot cuts, one per customer whose flow is below `needed`.
std::vector<std::vector<int>> min_cut_sets(const ArcIndex& arcs, const Eigen::VectorXd& point,
                                           int offset, bool symmetric, double needed) {
  const int n = arcs.num_nodes();
  std::vector<FlowArc> net;
  for (int a = 0; a < arcs.size(); ++a) {
    const int i = arcs.tail(a);
    const int j = arcs.head(a);
    double cap = point[offset + a];
    if (symmetric) cap += point[offset + arcs(j, i)];
    if (cap > kSupportEps) net.push_back({i, j, cap});
  }
  std::vector<std::vector<int>> out;
  for (int v = 1; v < n; ++v) {
    const auto flow = max_flow(n, net, v, 0);
    if (flow.value >= needed - kViolationTolerance) continue;
    std::vector<int> q;
    for (int u = 1; u < n; ++u) {
      if (flow.source_side[u]) q.push_back(u);
    }
    out.push_back(std::move(q));
  }
  return out;
}

class SubtourSeparator : public Separator {
 public:
  explicit SubtourSeparator(int num_nodes) : arcs_(num_nodes) {}
  std::vector<Cut> separate(const MilpModel&, const Eigen::VectorXd& point,
                            bool integral) const override {
    return separate_subtour(arcs_, point, integral);
  }

 private:
  ArcIndex arcs_;
};

class CapacitySeparator : public Separator {
 public:
  CapacitySeparator(int num_nodes, int stage, std::vector<double> demand, double capacity)
      : arcs_(num_nodes), stage_(stage), demand_(std::move(demand)), capacity_(capacity) {}
  std::vector<Cut> separate(const MilpModel&, const Eigen::VectorXd& point,
                            bool integral) const override {
    return separate_capacity(arcs_, point, stage_, demand_, capacity_, integral);
  }

 private:
  ArcIndex arcs_;
  int stage_;
  std::vector<double> demand_;
  double capacity_;
};

void add_degree_rows(MilpModel& model, const ArcIndex& arcs, int offset) {
  const int n = arcs.num_nodes();
  for (int v = 0; v < n; ++v) {
    std::vector<std::pair<int, double>> out_terms;
    std::vector<std::pair<int, double>> in_terms;
    for (int u = 0; u < n; ++u) {
      if (u == v) continue;
      out_terms.emplace_back(offset + arcs(v, u), 1.0);
      in_terms.emplace_back(offset + arcs(u, v), 1.0);
    }
    const Sense sense = v == 0 ? Sense::greater_equal : Sense::equal;
    model.lp.add_row(SparseRow(std::move(out_terms)), sense, 1.0);
    model.lp.add_row(SparseRow(std::move(in_terms)), sense, 1.0);
  }
}

}  // namespace

std::vector<Cut> separate_subtour(const ArcIndex& arcs, const Eigen::VectorXd& point,
                                  bool integral) {
  auto candidates = customer_components(arcs, point, 0, integral ? 0.5 : kSupportEps);
  if (!integral) {
    auto more = min_cut_sets(arcs, point, 0, false, 1.0);
    candidates.insert(candidates.end(), more.begin(), more.end());
  }
  std::set<std::vector<int>> seen;
  std::vector<Cut> cuts;
  for (auto& q : candidates) {
    std::sort(q.begin(), q.end());
    if (q.size() < 2 || !seen.insert(q).second) continue;
    std::vector<std::pair<int, double>> terms;
    double lhs = 0.0;
    for (int i : q) {
      for (int j : q) {
        if (i == j) continue;
        terms.emplace_back(arcs(i, j), 1.0);
        lhs += point[arcs(i, j)];
      }
    }
    const double rhs = static_cast<double>(q.size()) - 1.0;
    if (lhs <= rhs + kViolationTolerance) continue;
    Cut cut;
    cut.row = SparseRow(std::move(terms));
    cut.sense = Sense::less_equal;
    cut.rhs = rhs;
    cut.origin = CutOrigin::subtour;
    cut.scenario = 0;
    cut.aux = q;
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

std::vector<Cut> separate_capacity(const ArcIndex& arcs, const Eigen::VectorXd& point,
                                   int stage, std::span<const double> demand, double capacity,
                                   bool integral) {
  const int n = arcs.num_nodes();
  const int offset = stage * arcs.size();
  auto candidates = customer_components(arcs, point, offset, integral ? 0.5 : kSupportEps);
  if (!integral) {
    auto from_x = customer_components(arcs, point, 0, kSupportEps);
    candidates.insert(candidates.end(), from_x.begin(), from_x.end());
    auto from_cuts = min_cut_sets(arcs, point, offset, true, 2.0);
    candidates.insert(candidates.end(), from_cuts.begin(), from_cuts.end());
    std::vector<int> all(n - 1);
    std::iota(all.begin(), all.end(), 1);
    candidates.push_back(std::move(all));
  }
  std::set<std::vector<int>> seen;
  std::vector<Cut> cuts;
  std::vector<char> in_q(n, 0);
  for (auto& q : candidates) {
    std::sort(q.begin(), q.end());
    if (q.empty() || !seen.insert(q).second) continue;
    double load = 0.0;
    for (int i : q) load += demand[i];
    const double rhs = 2.0 * std::ceil(load / capacity - 1e-9);
    std::fill(in_q.begin(), in_q.end(), 0);
    for (int i : q) in_q[i] = 1;
    std::vector<std::pair<int, double>> terms;
    double crossing = 0.0;
    for (int i : q) {
      for (int j = 0; j < n; ++j) {
        if (in_q[j]) continue;
        terms.emplace_back(offset + arcs(i, j), 1.0);
        terms.emplace_back(offset + arcs(j, i), 1.0);
        crossing += point[offset + arcs(i, j)] + point[offset + arcs(j, i)];
      }
    }
    if (crossing >= rhs - kViolationTolerance) continue;
    Cut cut;
    cut.row = SparseRow(std::move(terms));
    cut.sense = Sense::greater_equal;
    cut.rhs = rhs;
    cut.origin = CutOrigin::capacity;
    cut.scenario = stage;
    cut.aux = q;
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

MilpModel build_scvrp_model(const Instance& inst) {
  std::vector<int> all(inst.num_scenarios());
  std::iota(all.begin(), all.end(), 0);
  return build_scvrp_model(inst, all, inst.scenarios.probabilities);
}

MilpModel build_scvrp_model(const Instance& inst, std::span<const int> selected,
                            std::span<const double> probabilities) {
  inst.validate();
  if (selected.size() != probabilities.size() || selected.empty()) {
    throw std::invalid_argument("scenario selection and probabilities differ in length");
  }
  const int n = inst.num_nodes();
  const ArcIndex arcs(n);
  const int num_arcs = arcs.size();
  const int s_count = static_cast<int>(selected.size());

  MilpModel model;
  model.num_scenarios = s_count;
  model.scenario_ids.assign(selected.begin(), selected.end());
  for (int a = 0; a < num_arcs; ++a) model.add_var(0.0, 0.0, 1.0, true, VarMeta{0, a});
  for (int s = 1; s <= s_count; ++s) {
    const double p = probabilities[s - 1];
    for (int a = 0; a < num_arcs; ++a) {
      model.add_var(p * inst.dist(arcs.tail(a), arcs.head(a)), 0.0, 1.0, true, VarMeta{s, a});
    }
  }
  for (int s = 0; s <= s_count; ++s) add_degree_rows(model, arcs, s * num_arcs);
  for (int s = 1; s <= s_count; ++s) {
    for (int i = 1; i < n; ++i) {
      for (int j = 1; j < n; ++j) {
        if (i == j) continue;
        model.lp.add_row(SparseRow({{s * num_arcs + arcs(i, j), 1.0}, {arcs(i, j), -1.0}}),
                         Sense::less_equal, 0.0);
      }
    }
  }
  model.separators.push_back(std::make_shared<SubtourSeparator>(n));
  for (int s = 1; s <= s_count; ++s) {
    const int original = selected[s - 1];
    if (original < 0 || original >= inst.num_scenarios()) {
      throw std::invalid_argument("selected scenario out of range");
    }
    model.separators.push_back(std::make_shared<CapacitySeparator>(
        n, s, inst.scenarios.payload[original], inst.capacity));
  }
  return model;
}

Instance generate_demands(const BaseInstance& base, double alpha, int num_scenarios,
                          std::uint64_t seed) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (num_scenarios < 1) throw std::invalid_argument("scenario count must be positive");
  const int n = base.num_nodes();
  if (static_cast<int>(base.demand.size()) != n) throw std::invalid_argument("base demand length mismatch");
  bool round_draws = true;
  for (int i = 1; i < n; ++i) {
    if (!(base.demand[i] > 0.0)) throw std::invalid_argument("base demands must be positive");
    if (base.demand[i] < 10.0 || base.demand[i] != std::floor(base.demand[i])) round_draws = false;
  }
  std::vector<std::lognormal_distribution<double>> draw;
  for (int i = 1; i < n; ++i) {
    const double m = base.demand[i];
    const double sigma2 = std::log1p(alpha * m / (m * m));
    draw.emplace_back(std::log(m) - sigma2 / 2.0, std::sqrt(sigma2));
  }
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.name = base.name;
  inst.dist = base.dist;
  inst.capacity = base.capacity;
  for (int s = 0; s < num_scenarios; ++s) {
    std::vector<double> b(n, 0.0);
    for (int i = 1; i < n; ++i) {
      double v = draw[i - 1](rng);
      if (round_draws) v = std::max(1.0, std::round(v));
      b[i] = v;
      inst.capacity = std::max(inst.capacity, v);
    }
    inst.scenarios.payload.push_back(std::move(b));
    inst.scenarios.probabilities.push_back(1.0 / num_scenarios);
  }
  return inst;
}

double scvrp_distance(const Instance& inst, int i, int j) {
  const auto& a = inst.scenarios.payload.at(i);
  const auto& b = inst.scenarios.payload.at(j);
  double total = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) total += std::abs(a[v] - b[v]);
  return total;
}

TwoStageProblem make_problem(const Instance& inst) {
  inst.validate();
  auto shared = std::make_shared<const Instance>(inst);
  TwoStageProblem problem;
  problem.probabilities = inst.scenarios.probabilities;
  problem.build_model = [shared](std::span<const int> selected, std::span<const double> probabilities) {
    return build_scvrp_model(*shared, selected, probabilities);
  };
  problem.distance = [shared](int i, int j) { return scvrp_distance(*shared, i, j); };
  return problem;
}

std::vector<std::vector<int>> extract_routes(const Instance& inst, const Eigen::VectorXd& point,
                                             int stage) {
  const int n = inst.num_nodes();
  const ArcIndex arcs(n);
  const int offset = stage * arcs.size();
  auto next_of = [&](int i) {
    for (int j = 0; j < n; ++j) {
      if (j != i && point[offset + arcs(i, j)] > 0.5) return j;
    }
    return -1;
  };
  std::vector<std::vector<int>> routes;
  for (int j = 1; j < n; ++j) {
    if (point[offset + arcs(0, j)] <= 0.5) continue;
    std::vector<int> route;
    int v = j;
    while (v > 0 && static_cast<int>(route.size()) < n) {
      route.push_back(v);
      v = next_of(v);
    }
    routes.push_back(std::move(route));
  }
  return routes;
}

}  // namespace tulip::scvrp
