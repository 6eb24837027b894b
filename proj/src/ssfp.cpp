// SPDX-License-Identifier: Apache-2.0

#include "tulip/ssfp.hpp"

#include "tulip/branch_and_cut.hpp"
#include "tulip/max_flow.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace tulip::ssfp {

namespace {

void validate_stage(const Instance& inst, const StageData& stage, const std::string& what) {
  if (stage.cost.rows() != inst.num_types || stage.cost.cols() != inst.num_edges()) {
    throw std::invalid_argument(what + ": cost matrix must be types x edges");
  }
  for (int m = 0; m < inst.num_types; ++m) {
    for (int e = 0; e < inst.num_edges(); ++e) {
      const double c = stage.cost(m, e);
      if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument(what + ": costs must be finite and >= 0");
    }
  }
  if (stage.types.empty()) throw std::invalid_argument(what + ": no usable connection type");
  for (std::size_t i = 0; i < stage.types.size(); ++i) {
    const int m = stage.types[i];
    if (m < 0 || m >= inst.num_types) throw std::invalid_argument(what + ": unknown connection type");
    if (i > 0 && stage.types[i - 1] >= m) throw std::invalid_argument(what + ": types must be sorted and distinct");
  }
  for (const auto& g : stage.groups) {
    if (g.empty()) throw std::invalid_argument(what + ": empty terminal group");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] < 0 || g[i] >= inst.num_vertices) throw std::invalid_argument(what + ": terminal out of range");
      if (i > 0 && g[i - 1] >= g[i]) throw std::invalid_argument(what + ": groups must be sorted and distinct");
    }
  }
}

int tail_of(const Instance& inst, int a) { return inst.edges[static_cast<std::size_t>(a / 2)][a % 2]; }
int head_of(const Instance& inst, int a) { return inst.edges[static_cast<std::size_t>(a / 2)][1 - a % 2]; }

/// Column indices of one stage block.
struct StageColumns {
  int ntypes = 0;
  std::vector<int> x;   // m * E + e, every type
  std::vector<int> y;   // ti * A + a, usable types
  std::vector<int> yk;  // (k * ntypes + ti) * A + a
  std::vector<int> z;   // k * K + l, -1 when l < k
};

class ConnectivitySeparator : public Separator {
 public:
  ConnectivitySeparator(const Instance& inst, const StageData& data, int stage, StageColumns cols)
      : stage_(stage), num_vertices_(inst.num_vertices), groups_(data.groups), cols_(std::move(cols)) {
    for (int a = 0; a < inst.num_arcs(); ++a) {
      tails_.push_back(tail_of(inst, a));
      heads_.push_back(head_of(inst, a));
    }
  }

  std::vector<Cut> separate(const MilpModel&, const Eigen::VectorXd& point, bool) const override {
    const int na = static_cast<int>(tails_.size());
    const int ng = static_cast<int>(groups_.size());
    std::vector<Cut> cuts;
    std::set<std::string> emitted;
    std::vector<double> load(static_cast<std::size_t>(na));
    std::vector<FlowArc> net(static_cast<std::size_t>(na));
    for (int k = 0; k < ng; ++k) {
      const int root = groups_[static_cast<std::size_t>(k)].front();
      for (int a = 0; a < na; ++a) {
        double v = 0.0;
        for (int ti = 0; ti < cols_.ntypes; ++ti) v += point[yk(k, ti, a)];
        load[static_cast<std::size_t>(a)] = v;
        net[static_cast<std::size_t>(a)] = {tails_[static_cast<std::size_t>(a)],
                                            heads_[static_cast<std::size_t>(a)],
                                            std::max(0.0, v) + kCreep};
      }
      for (int l = k; l < ng; ++l) {
        const int zc = cols_.z[static_cast<std::size_t>(k * ng + l)];
        const double zhat = point[zc];
        if (zhat <= kConnectivityViolation) continue;
        for (int t : groups_[static_cast<std::size_t>(l)]) {
          if (t == root) continue;
          const auto flow = max_flow(num_vertices_, net, root, t);
          if (flow.value >= zhat - kConnectivityViolation) continue;
          for (const auto* side : {&flow.source_side, &flow.sink_side}) {
            std::vector<std::pair<int, double>> terms;
            double lhs = -zhat;
            for (int a = 0; a < na; ++a) {
              if (!(*side)[static_cast<std::size_t>(tails_[static_cast<std::size_t>(a)])] ||
                  (*side)[static_cast<std::size_t>(heads_[static_cast<std::size_t>(a)])]) {
                continue;
              }
              for (int ti = 0; ti < cols_.ntypes; ++ti) terms.emplace_back(yk(k, ti, a), 1.0);
              lhs += load[static_cast<std::size_t>(a)];
            }
            if (lhs >= -kConnectivityViolation) continue;
            terms.emplace_back(zc, -1.0);
            Cut cut;
            cut.row = SparseRow(std::move(terms));
            cut.sense = Sense::greater_equal;
            cut.rhs = 0.0;
            cut.origin = CutOrigin::connectivity;
            cut.scenario = stage_;
            for (int v = 0; v < num_vertices_; ++v) {
              if ((*side)[static_cast<std::size_t>(v)]) cut.aux.push_back(v);
            }
            if (!emitted.insert(cut_key(cut)).second) continue;
            cuts.push_back(std::move(cut));
          }
        }
      }
    }
    return cuts;
  }

 private:
  int yk(int k, int ti, int a) const {
    const int na = static_cast<int>(tails_.size());
    return cols_.yk[static_cast<std::size_t>((k * cols_.ntypes + ti) * na + a)];
  }

  int stage_;
  int num_vertices_;
  std::vector<std::vector<int>> groups_;
  StageColumns cols_;
  std::vector<int> tails_;
  std::vector<int> heads_;
};

class Builder {
 public:
  Builder(const Instance& inst, MilpModel& model) : inst_(inst), model_(model) {}

  StageColumns add_stage(int stage, const StageData& data, const Eigen::MatrixXd& x_cost,
                         const std::vector<int>* first_stage_x, bool flow) {
    role_ = 0;
    const int ne = inst_.num_edges();
    const int na = inst_.num_arcs();
    const int nv = inst_.num_vertices;
    const int ng = data.num_groups();
    StageColumns cols;
    cols.ntypes = static_cast<int>(data.types.size());

    for (int m = 0; m < inst_.num_types; ++m) {
      for (int e = 0; e < ne; ++e) cols.x.push_back(var(x_cost(m, e), 1.0, true, stage));
    }
    for (int ti = 0; ti < cols.ntypes; ++ti) {
      for (int a = 0; a < na; ++a) cols.y.push_back(var(0.0, 1.0, false, stage));
    }

    // Terminals of groups 0..k-1 for each k.
    std::vector<std::vector<char>> earlier(static_cast<std::size_t>(ng), std::vector<char>(nv, 0));
    for (int k = 1; k < ng; ++k) {
      earlier[k] = earlier[k - 1];
      for (int t : data.groups[k - 1]) earlier[k][t] = 1;
    }
    for (int k = 0; k < ng; ++k) {
      for (int ti = 0; ti < cols.ntypes; ++ti) {
        for (int a = 0; a < na; ++a) {
          const bool blocked = earlier[k][head_of(inst_, a)] != 0;
          cols.yk.push_back(var(0.0, blocked ? 0.0 : 1.0, false, stage));
        }
      }
    }
    cols.z.assign(static_cast<std::size_t>(ng * ng), -1);
    for (int k = 0; k < ng; ++k) {
      for (int l = k; l < ng; ++l) cols.z[k * ng + l] = var(0.0, 1.0, true, stage);
    }
    auto y = [&](int ti, int a) { return cols.y[ti * na + a]; };
    auto yk = [&](int k, int ti, int a) { return cols.yk[(k * cols.ntypes + ti) * na + a]; };

    for (int ti = 0; ti < cols.ntypes; ++ti) {
      for (int a = 0; a < na; ++a) {
        std::vector<std::pair<int, double>> terms{{y(ti, a), -1.0}};
        for (int k = 0; k < ng; ++k) terms.emplace_back(yk(k, ti, a), 1.0);
        row(std::move(terms), Sense::less_equal, 0.0);
      }
      const int m = data.types[ti];
      for (int e = 0; e < ne; ++e) {
        row({{y(ti, 2 * e), 1.0}, {y(ti, 2 * e + 1), 1.0}, {cols.x[m * ne + e], -1.0}},
            Sense::less_equal, 0.0);
      }
    }
    for (int k = 0; k < ng; ++k) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j <= k; ++j) terms.emplace_back(cols.z[j * ng + k], 1.0);
      row(std::move(terms), Sense::equal, 1.0);
      for (int l = k + 1; l < ng; ++l) {
        row({{cols.z[k * ng + l], 1.0}, {cols.z[k * ng + k], -1.0}}, Sense::less_equal, 0.0);
      }
    }

    std::vector<char> terminal(nv, 0);
    for (const auto& g : data.groups) {
      for (int t : g) terminal[t] = 1;
    }
    for (int v = 0; v < nv; ++v) {
      std::vector<std::pair<int, double>> in_terms;
      std::vector<std::pair<int, double>> balance;
      for (int a = 0; a < na; ++a) {
        for (int ti = 0; ti < cols.ntypes; ++ti) {
          if (head_of(inst_, a) == v) {
            in_terms.emplace_back(y(ti, a), 1.0);
            balance.emplace_back(y(ti, a), 1.0);
          } else if (tail_of(inst_, a) == v) {
            balance.emplace_back(y(ti, a), -1.0);
          }
        }
      }
      if (in_terms.empty()) continue;
      row(std::move(in_terms), Sense::less_equal, 1.0);
      if (!terminal[v]) row(std::move(balance), Sense::less_equal, 0.0);
    }

    for (int k = 0; k < ng; ++k) {
      std::vector<char> exempt(nv, 0);
      for (int l = k; l < ng; ++l) {
        for (int t : data.groups[l]) exempt[t] = 1;
      }
      exempt[data.root(k)] = 0;
      for (int v = 0; v < nv; ++v) {
        if (exempt[v]) continue;
        std::vector<std::pair<int, double>> balance;
        for (int a = 0; a < na; ++a) {
          for (int ti = 0; ti < cols.ntypes; ++ti) {
            if (head_of(inst_, a) == v) balance.emplace_back(yk(k, ti, a), 1.0);
            if (tail_of(inst_, a) == v) balance.emplace_back(yk(k, ti, a), -1.0);
          }
        }
        if (!balance.empty()) row(std::move(balance), Sense::less_equal, 0.0);
      }
      for (int l = k + 1; l < ng; ++l) {
        const int rl = data.root(l);
        for (int ti = 0; ti < cols.ntypes; ++ti) {
          std::vector<std::pair<int, double>> terms{{cols.z[k * ng + l], -1.0}};
          for (int a = 0; a < na; ++a) {
            if (head_of(inst_, a) == rl) terms.emplace_back(yk(k, ti, a), 1.0);
          }
          row(std::move(terms), Sense::less_equal, 0.0);
        }
      }
    }

    if (first_stage_x != nullptr) {
      for (std::size_t j = 0; j < cols.x.size(); ++j) {
        row({{cols.x[j], 1.0}, {(*first_stage_x)[j], -1.0}}, Sense::greater_equal, 0.0);
      }
    }

    if (flow) {
      add_flows(stage, data, cols);
    } else {
      model_.separators.push_back(std::make_shared<ConnectivitySeparator>(inst_, data, stage, cols));
    }
    return cols;
  }

 private:
  int var(double cost, double upper, bool integral, int stage) {
    return model_.add_var(cost, 0.0, upper, integral, VarMeta{stage, role_++});
  }
  void row(std::vector<std::pair<int, double>> terms, Sense sense, double rhs) {
    model_.lp.add_row(SparseRow(std::move(terms)), sense, rhs);
  }

  void add_flows(int stage, const StageData& data, const StageColumns& cols) {
    const int na = inst_.num_arcs();
    const int nv = inst_.num_vertices;
    const int ng = data.num_groups();
    for (int k = 0; k < ng; ++k) {
      const int root = data.root(k);
      for (int l = k; l < ng; ++l) {
        const int zc = cols.z[k * ng + l];
        for (int t : data.groups[l]) {
          if (t == root) continue;
          std::vector<int> f;
          for (int ti = 0; ti < cols.ntypes; ++ti) {
            for (int a = 0; a < na; ++a) {
              const bool leaves_t = tail_of(inst_, a) == t;
              const int yc = cols.yk[(k * cols.ntypes + ti) * na + a];
              const double hi = leaves_t ? 0.0 : model_.lp.upper[yc];
              f.push_back(var(0.0, hi, true, stage));
              row({{f.back(), 1.0}, {yc, -1.0}}, Sense::less_equal, 0.0);
            }
          }
          for (int v = 0; v < nv; ++v) {
            std::vector<std::pair<int, double>> terms;
            for (int ti = 0; ti < cols.ntypes; ++ti) {
              for (int a = 0; a < na; ++a) {
                if (tail_of(inst_, a) == v) terms.emplace_back(f[ti * na + a], 1.0);
                if (head_of(inst_, a) == v) terms.emplace_back(f[ti * na + a], -1.0);
              }
            }
            if (v == root) terms.emplace_back(zc, -1.0);
            if (v == t) terms.emplace_back(zc, 1.0);
            if (!terms.empty()) row(std::move(terms), Sense::equal, 0.0);
          }
        }
      }
    }
  }

  const Instance& inst_;
  MilpModel& model_;
  int role_ = 0;
};

MilpModel build(const Instance& inst, std::span<const int> selected,
                std::span<const double> probabilities, bool flow) {
  inst.validate();
  if (selected.size() != probabilities.size()) {
    throw std::invalid_argument("selected scenarios and probabilities differ in length");
  }
  for (int s : selected) {
    if (s < 0 || s >= inst.num_scenarios()) throw std::invalid_argument("selected scenario out of range");
  }
  if (!selected.empty()) validate_probabilities(probabilities);

  MilpModel model;
  Builder builder(inst, model);
  Eigen::MatrixXd first_cost = inst.first_stage.cost;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    first_cost -= probabilities[i] * inst.scenarios.payload[static_cast<std::size_t>(selected[i])].cost;
  }
  const auto first = builder.add_stage(0, inst.first_stage, first_cost, nullptr, flow);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto& data = inst.scenarios.payload[static_cast<std::size_t>(selected[i])];
    const Eigen::MatrixXd cost = probabilities[i] * data.cost;
    builder.add_stage(static_cast<int>(i) + 1, data, cost, &first.x, flow);
  }
  model.num_scenarios = static_cast<int>(selected.size());
  model.scenario_ids.assign(selected.begin(), selected.end());
  return model;
}

std::vector<int> all_scenarios(const Instance& inst) {
  std::vector<int> out(static_cast<std::size_t>(inst.num_scenarios()));
  for (int s = 0; s < inst.num_scenarios(); ++s) out[static_cast<std::size_t>(s)] = s;
  return out;
}

}  // namespace

void Instance::validate() const {
  if (num_vertices < 1) throw std::invalid_argument("SSFP graph needs at least one vertex");
  if (num_types < 1) throw std::invalid_argument("SSFP needs at least one connection type");
  std::set<std::array<int, 2>> seen;
  for (const auto& e : edges) {
    if (e[0] < 0 || e[1] >= num_vertices || e[0] >= e[1]) {
      throw std::invalid_argument("SSFP edges must satisfy 0 <= u < v < |V|");
    }
    if (!seen.insert(e).second) throw std::invalid_argument("SSFP graph has a duplicate edge");
  }
  validate_stage(*this, first_stage, "first stage");
  if (static_cast<int>(scenarios.payload.size()) != scenarios.size()) {
    throw std::invalid_argument("SSFP scenario payload count differs from probabilities");
  }
  if (!scenarios.probabilities.empty()) validate_probabilities(scenarios.probabilities);
  for (int s = 0; s < num_scenarios(); ++s) {
    validate_stage(*this, scenarios.payload[static_cast<std::size_t>(s)],
                   "scenario " + std::to_string(s + 1));
  }
}

void normalize(Instance& inst) {
  auto fix = [](StageData& data) {
    for (auto& g : data.groups) {
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    std::sort(data.types.begin(), data.types.end());
    data.types.erase(std::unique(data.types.begin(), data.types.end()), data.types.end());
  };
  fix(inst.first_stage);
  for (auto& data : inst.scenarios.payload) fix(data);
}

Instance deterministic_restriction(const Instance& inst) {
  Instance out = inst;
  out.scenarios = {};
  return out;
}

MilpModel build_ssfp_cut_model(const Instance& inst) {
  const auto all = all_scenarios(inst);
  return build(inst, all, inst.scenarios.probabilities, false);
}

MilpModel build_ssfp_cut_model(const Instance& inst, std::span<const int> selected,
                               std::span<const double> probabilities) {
  return build(inst, selected, probabilities, false);
}

MilpModel build_ssfp_flow_model(const Instance& inst) {
  const auto all = all_scenarios(inst);
  return build(inst, all, inst.scenarios.probabilities, true);
}

MilpModel build_ssfp_flow_model(const Instance& inst, std::span<const int> selected,
                                std::span<const double> probabilities) {
  return build(inst, selected, probabilities, true);
}

int install_column(const Instance& inst, const MilpModel& model, int stage, int type, int edge) {
  if (type < 0 || type >= inst.num_types || edge < 0 || edge >= inst.num_edges()) {
    throw std::invalid_argument("install_column: type or edge out of range");
  }
  const int role = type * inst.num_edges() + edge;
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& meta = model.var_meta[static_cast<std::size_t>(j)];
    if (meta.stage == stage && meta.role == role) return j;
  }
  throw std::invalid_argument("install_column: stage not present in model");
}

std::vector<double> stage_costs(const Instance& inst, const MilpModel& model,
                                const Eigen::VectorXd& point) {
  std::vector<double> out(static_cast<std::size_t>(model.num_scenarios) + 1, 0.0);
  for (int m = 0; m < inst.num_types; ++m) {
    for (int e = 0; e < inst.num_edges(); ++e) {
      const double x0 = point[install_column(inst, model, 0, m, e)];
      out[0] += inst.first_stage.cost(m, e) * x0;
      for (int s = 1; s <= model.num_scenarios; ++s) {
        const auto& data =
            inst.scenarios.payload[static_cast<std::size_t>(model.original_scenario(s))];
        out[static_cast<std::size_t>(s)] +=
            data.cost(m, e) * (point[install_column(inst, model, s, m, e)] - x0);
      }
    }
  }
  return out;
}

void validate_weights(const DistanceWeights& beta) {
  for (double b : {beta.cost, beta.terminals, beta.types}) {
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("distance weights must lie in [0, 1]");
  }
  if (std::abs(beta.cost + beta.terminals + beta.types - 1.0) > 1e-9) {
    throw std::invalid_argument("distance weights must sum to 1");
  }
}

double cost_distance(const Instance& inst, int i, int j) {
  const auto& a = inst.scenarios.payload.at(static_cast<std::size_t>(i)).cost;
  const auto& b = inst.scenarios.payload.at(static_cast<std::size_t>(j)).cost;
  return (a - b).norm();
}

double terminal_distance(const StageData& a, const StageData& b) {
  double total = 0.0;
  for (const auto& g1 : a.groups) {
    std::size_t best = g1.size();
    for (const auto& g2 : b.groups) {
      std::vector<int> diff;
      std::set_symmetric_difference(g1.begin(), g1.end(), g2.begin(), g2.end(),
                                    std::back_inserter(diff));
      best = std::min(best, diff.size());
    }
    total += static_cast<double>(best);
  }
  return total;
}

double type_distance(const StageData& a, const StageData& b) {
  std::vector<int> diff;
  std::set_symmetric_difference(a.types.begin(), a.types.end(), b.types.begin(), b.types.end(),
                                std::back_inserter(diff));
  return static_cast<double>(diff.size());
}

double ssfp_distance(const Instance& inst, int i, int j, const DistanceWeights& beta) {
  validate_weights(beta);
  if (i == j) return 0.0;
  const auto& a = inst.scenarios.payload.at(static_cast<std::size_t>(i));
  const auto& b = inst.scenarios.payload.at(static_cast<std::size_t>(j));
  double d = 0.0;
  if (beta.cost > 0.0) d += beta.cost * cost_distance(inst, i, j);
  if (beta.terminals > 0.0) {
    d += beta.terminals * 0.5 * (terminal_distance(a, b) + terminal_distance(b, a));
  }
  if (beta.types > 0.0) d += beta.types * type_distance(a, b);
  return d;
}

Instance toy_instance(double second_probability) {
  if (!(second_probability > 0.0 && second_probability < 1.0)) {
    throw std::invalid_argument("toy probability must lie in (0, 1)");
  }
  Instance inst;
  inst.name = "toy";
  inst.num_vertices = 4;
  inst.num_types = 2;
  // A = 0, B = 1, C = 2, D = 3.
  inst.edges = {{0, 2}, {0, 3}, {1, 2}, {2, 3}};
  Eigen::MatrixXd cost(2, 4);
  cost.row(0) << 1.0, 1.5, 1.0, 1.0;
  cost.row(1) = 2.0 * cost.row(0);
  inst.first_stage = {{{0, 3}}, {0, 1}, cost};
  const StageData first{{{0, 3}}, {0, 1}, 2.0 * cost};
  const StageData second{{{0, 1}}, {1}, 2.0 * cost};
  inst.scenarios.probabilities = {1.0 - second_probability, second_probability};
  inst.scenarios.payload = {first, second};
  inst.validate();
  return inst;
}

TwoStageProblem make_problem(const Instance& inst, const DistanceWeights& beta, bool flow_model) {
  inst.validate();
  validate_weights(beta);
  auto shared = std::make_shared<const Instance>(inst);
  TwoStageProblem problem;
  problem.probabilities = inst.scenarios.probabilities;
  problem.build_model = [shared, flow_model](std::span<const int> selected,
                                             std::span<const double> probabilities) {
    return build(*shared, selected, probabilities, flow_model);
  };
  problem.distance = [shared, beta](int i, int j) { return ssfp_distance(*shared, i, j, beta); };
  return problem;
}

}  // namespace tulip::ssfp
