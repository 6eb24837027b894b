// SPDX-License-Identifier: Apache-2.0

#include "tulip/branch_and_cut.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>

namespace tulip {

std::string cut_key(const Cut& cut) {
  std::string key;
  key.reserve(16 + 24 * cut.row.size());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%c%.17g|", sense_code(cut.sense), cut.rhs);
  key += buf;
  const auto idx = cut.row.indices();
  const auto val = cut.row.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%d:%.17g,", idx[k], val[k]);
    key += buf;
  }
  return key;
}

bool CutPool::add(Cut cut) {
  if (!keys_.insert(cut_key(cut)).second) return false;
  cuts_.push_back(std::move(cut));
  return true;
}

CutPool filter_tight(const CutPool& pool, const Eigen::VectorXd& point, double tight_tolerance) {
  CutPool out;
  for (const auto& cut : pool.cuts()) {
    if (cut_slack(cut, point) <= tight_tolerance) out.add(cut);
  }
  return out;
}

bool is_integral_point(const MilpModel& model, const Eigen::VectorXd& point, double tolerance) {
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.integral[j] && std::abs(point[j] - std::round(point[j])) > tolerance) return false;
  }
  return true;
}

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Cut> run_separators(const MilpModel& model, const Eigen::VectorXd& point,
                                bool integral) {
  std::vector<Cut> out;
  for (const auto& sep : model.separators) {
    for (auto& cut : sep->separate(model, point, integral)) {
      if (cut.row.max_index() >= model.num_vars()) {
        throw StructuralError("separator returned a cut over unknown columns");
      }
      out.push_back(std::move(cut));
    }
  }
  return out;
}

/// Adds the cuts not yet in `pool` to both the pool and the LP; returns how many.
int install_new_cuts(std::vector<Cut>& cuts, CutPool& pool, LpSolver& solver,
                     std::array<long, kNumCutOrigins>* counts) {
  int added = 0;
  for (auto& cut : cuts) {
    if (pool.contains(cut)) continue;
    solver.add_row(cut.row, cut.sense, cut.rhs);
    if (counts) ++(*counts)[static_cast<std::size_t>(cut.origin)];
    pool.add(std::move(cut));
    ++added;
  }
  return added;
}

LpSolution solve_checked(LpSolver& solver, const Basis* warm) {
  LpSolution sol = solver.solve(warm);
  if (sol.status == LpStatus::numerical_failure && warm != nullptr) sol = solver.solve(nullptr);
  if (sol.status == LpStatus::numerical_failure) {
    throw std::runtime_error("LP relaxation could not be solved reliably");
  }
  if (sol.status == LpStatus::unbounded) {
    throw std::runtime_error("LP relaxation is unbounded");
  }
  return sol;
}

LpOptions with_deadline(const BncOptions& options, Clock::time_point start) {
  LpOptions out = options.lp;
  if (options.time_limit < 1e9) {
    const auto budget = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(std::max(0.0, options.time_limit)));
    out.deadline = std::min(out.deadline, start + budget);
  }
  return out;
}

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;
  Basis basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

}  // namespace

RootResult solve_root(const MilpModel& model, const BncOptions& options) {
  const auto start = Clock::now();
  model.validate();
  RootResult result;
  LpSolver solver(model.lp, with_deadline(options, start));
  Basis basis;
  while (true) {
    LpSolution sol = solve_checked(solver, basis.empty() ? nullptr : &basis);
    if (sol.status == LpStatus::time_limit) {
      result.status = SolveStatus::time_limit;
      break;
    }
    result.lp = std::move(sol);
    if (result.rounds == 0) result.initial_bound = result.lp.objective;
    if (result.lp.status == LpStatus::infeasible) {
      result.status = SolveStatus::infeasible;
      return result;
    }
    basis = result.lp.basis;
    if (result.rounds >= options.root_round_limit) break;
    if (seconds_since(start) > options.time_limit) {
      result.status = SolveStatus::time_limit;
      break;
    }
    auto cuts = run_separators(model, result.lp.point, is_integral_point(model, result.lp.point));
    if (install_new_cuts(cuts, result.pool, solver, nullptr) == 0) break;
    ++result.rounds;
  }
  return result;
}

SolveReport solve_bnc(const MilpModel& model, const CutPool& initial_cuts,
                      const BncOptions& options) {
  const auto start = Clock::now();
  model.validate();
  const int n = model.num_vars();
  SolveReport report;
  LpSolver solver(model.lp, with_deadline(options, start));
  CutPool pool;
  for (const auto& cut : initial_cuts.cuts()) {
    if (cut.row.max_index() >= n) throw StructuralError("initial cut references unknown column");
    if (pool.add(cut)) solver.add_row(cut.row, cut.sense, cut.rhs);
  }

  if (options.event_log) *options.event_log << "node,depth,bound,incumbent,cuts_added\n";

  double incumbent = kInf;
  auto prune_level = [&] {
    return std::isfinite(incumbent) ? incumbent - 1e-9 * std::max(1.0, std::abs(incumbent))
                                    : kInf;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{});
  long next_id = 1;
  std::vector<BoundChange> applied;
  bool timed_out = false;
  double open_bound_at_stop = kInf;

  while (!open.empty()) {
    if (report.nodes > 0 && seconds_since(start) > options.time_limit) {
      timed_out = true;
      open_bound_at_stop = open.top().bound;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= prune_level()) continue;

    for (const auto& bc : applied) {
      solver.set_bounds(bc.var, model.lp.lower[bc.var], model.lp.upper[bc.var]);
    }
    for (const auto& bc : node.changes) solver.set_bounds(bc.var, bc.lower, bc.upper);
    applied = node.changes;

    ++report.nodes;
    const bool separate_fractional =
        node.id == 0 || (options.fractional_separation_interval > 0 &&
                         report.nodes % options.fractional_separation_interval == 0);
    const Basis* warm = node.basis.empty() ? nullptr : &node.basis;
    LpSolution sol;
    double lp_bound = -kInf;
    int rounds = 0;
    long cuts_here = 0;
    bool pruned = false;
    bool accepted = false;
    bool interrupted = false;
    while (true) {
      sol = solve_checked(solver, warm);
      if (sol.status == LpStatus::time_limit) {
        interrupted = true;
        break;
      }
      if (sol.status == LpStatus::infeasible || sol.objective >= prune_level()) {
        pruned = true;
        break;
      }
      lp_bound = sol.objective;
      node.basis = sol.basis;
      warm = &node.basis;
      if (seconds_since(start) > options.time_limit) {
        interrupted = true;
        break;
      }
      const bool integral = is_integral_point(model, sol.point);
      if (!integral && (!separate_fractional || rounds >= options.root_round_limit)) break;
      auto cuts = run_separators(model, sol.point, integral);
      const int added = install_new_cuts(cuts, pool, solver, &report.cuts_added);
      cuts_here += added;
      ++rounds;
      if (added > 0) continue;
      accepted = integral;
      break;
    }
    const double node_bound = pruned ? kInf : std::max(node.bound, lp_bound);

    if (interrupted) {
      node.bound = node_bound;
      open.push(node);
    } else if (accepted) {
      Eigen::VectorXd point = sol.point;
      for (int j = 0; j < n; ++j) {
        if (model.integral[j]) point[j] = std::round(point[j]);
      }
      const double value = model.lp.objective.dot(point);
      if (value < incumbent) {
        incumbent = value;
        report.solution = point;
      }
    } else if (!pruned) {
      int branch = -1;
      double best = kInf;
      for (int j = 0; j < n; ++j) {
        if (!model.integral[j]) continue;
        const double frac = sol.point[j] - std::floor(sol.point[j]);
        if (frac <= kIntegralityTolerance || frac >= 1.0 - kIntegralityTolerance) continue;
        const double score = std::abs(frac - 0.5);
        if (score < best) {
          best = score;
          branch = j;
        }
      }
      const double v = sol.point[branch];
      Node down{next_id++, node.depth + 1, node_bound, node.changes, node.basis};
      Node up{next_id++, node.depth + 1, node_bound, node.changes, node.basis};
      auto tighten = [&](Node& child, double lo, double hi) {
        for (auto& bc : child.changes) {
          if (bc.var == branch) {
            bc.lower = std::max(bc.lower, lo);
            bc.upper = std::min(bc.upper, hi);
            return;
          }
        }
        child.changes.push_back({branch, std::max(solver.lower(branch), lo),
                                 std::min(solver.upper(branch), hi)});
      };
      tighten(down, -kInf, std::floor(v));
      tighten(up, std::ceil(v), kInf);
      open.push(std::move(down));
      open.push(std::move(up));
    }

    if (options.event_log) {
      char line[160];
      std::snprintf(line, sizeof line, "%ld,%d,%.10g,%.10g,%ld\n", node.id, node.depth,
                    node_bound, incumbent, cuts_here);
      *options.event_log << line;
    }
  }

  report.pool_size = static_cast<long>(pool.size());
  report.objective = incumbent;
  if (timed_out) {
    report.status = SolveStatus::time_limit;
    report.bound = std::min(open_bound_at_stop, incumbent);
  } else if (std::isfinite(incumbent)) {
    report.status = SolveStatus::optimal;
    report.bound = incumbent;
  } else {
    report.status = SolveStatus::infeasible;
    report.bound = kInf;
  }
  report.gap = relative_gap(report.objective, report.bound);
  report.wall_time.full = seconds_since(start);
  return report;
}

}  // namespace tulip
