// SPDX-License-Identifier: Apache-2.0

#include "tulip/tulip_driver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tulip {

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

BncOptions with_budget(const BncOptions& options, double remaining) {
  BncOptions out = options;
  out.time_limit = std::max(0.0, remaining);
  return out;
}

std::vector<int> identity(int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

}  // namespace

MilpModel TwoStageProblem::build_full() const {
  const auto all = identity(num_scenarios());
  return build_model(all, probabilities);
}

int column_block(const MilpModel& model, int column) {
  const int stage = model.var_meta[static_cast<std::size_t>(column)].stage;
  return stage == 0 ? 0 : model.original_scenario(stage) + 1;
}

ColumnMap::ColumnMap(const MilpModel& model) {
  for (int j = 0; j < model.num_vars(); ++j) {
    index_.emplace(std::make_pair(column_block(model, j), model.var_meta[static_cast<std::size_t>(j)].role), j);
  }
}

int ColumnMap::column(int block, int role) const {
  const auto it = index_.find({block, role});
  return it == index_.end() ? -1 : it->second;
}

std::optional<Cut> transfer_cut(const Cut& cut, const MilpModel& reduced, const ColumnMap& target) {
  std::vector<std::pair<int, double>> terms;
  const auto idx = cut.row.indices();
  const auto val = cut.row.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int j = idx[k];
    const int mapped = target.column(column_block(reduced, j),
                                     reduced.var_meta[static_cast<std::size_t>(j)].role);
    if (mapped < 0) return std::nullopt;
    terms.emplace_back(mapped, val[k]);
  }
  Cut out = cut;
  out.row = SparseRow(std::move(terms));
  out.scenario = cut.scenario == 0 ? 0 : reduced.original_scenario(cut.scenario) + 1;
  return out;
}

DistanceMatrix distance_matrix(const TwoStageProblem& problem) {
  const int n = problem.num_scenarios();
  DistanceMatrix d = DistanceMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) d(i, j) = problem.distance(i, j);
    }
  }
  validate_distance_matrix(d);
  return d;
}

SolveReport solve_direct(const TwoStageProblem& problem, const BncOptions& options) {
  return solve_bnc(problem.build_full(), {}, options);
}

SolveReport tulip_solve(const TwoStageProblem& problem, double fraction, const BncOptions& options) {
  const auto start = Clock::now();
  const int target = reduction_fraction_to_target(problem.num_scenarios(), fraction);
  const Reduction reduction = fast_forward_select(distance_matrix(problem), problem.probabilities, target);
  const double reduction_time = seconds_since(start);

  const MilpModel reduced = problem.build_model(reduction.selected, reduction.new_probabilities);
  const RootResult root = solve_root(reduced, with_budget(options, options.time_limit - seconds_since(start)));
  CutPool tight;
  if (root.lp.point.size() == reduced.num_vars()) tight = filter_tight(root.pool, root.lp.point);
  const double root_time = seconds_since(start) - reduction_time;

  const MilpModel full = problem.build_full();
  const ColumnMap columns(full);
  CutPool initial;
  for (const auto& cut : tight.cuts()) {
    auto mapped = transfer_cut(cut, reduced, columns);
    if (!mapped) throw StructuralError("tight cut has no counterpart in the full model");
    initial.add(std::move(*mapped));
  }
  SolveReport report =
      solve_bnc(full, initial, with_budget(options, options.time_limit - seconds_since(start)));
  report.cuts_transferred = static_cast<long>(initial.size());
  report.tight_ratio = root.pool.empty() ? 1.0
                                         : static_cast<double>(tight.size()) /
                                               static_cast<double>(root.pool.size());
  report.wall_time.reduction = reduction_time;
  report.wall_time.root = root_time;
  report.wall_time.full = seconds_since(start) - reduction_time - root_time;
  return report;
}

std::vector<std::pair<int, double>> first_stage_values(const MilpModel& model,
                                                       const Eigen::VectorXd& point) {
  if (point.size() != model.num_vars()) throw std::invalid_argument("point has the wrong length");
  std::vector<std::pair<int, double>> out;
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& meta = model.var_meta[static_cast<std::size_t>(j)];
    if (meta.stage == 0 && model.integral[static_cast<std::size_t>(j)]) {
      out.emplace_back(meta.role, std::round(point[j]));
    }
  }
  return out;
}

SolveReport fix_first_stage_and_resolve(const TwoStageProblem& problem,
                                        std::span<const std::pair<int, double>> first_stage,
                                        const BncOptions& options) {
  MilpModel full = problem.build_full();
  const ColumnMap columns(full);
  for (const auto& [role, value] : first_stage) {
    const int j = columns.column(0, role);
    if (j < 0) throw std::invalid_argument("first-stage role not present in the model");
    if (value < full.lp.lower[j] || value > full.lp.upper[j]) {
      SolveReport report;
      report.status = SolveStatus::infeasible;
      return report;
    }
    full.lp.lower[j] = value;
    full.lp.upper[j] = value;
  }
  return solve_bnc(full, {}, options);
}

namespace {

using FirstStage = std::vector<std::pair<int, double>>;

std::optional<FirstStage> reduced_first_stage(const TwoStageProblem& problem,
                                              std::span<const int> selected,
                                              std::span<const double> probabilities,
                                              const BncOptions& options) {
  const MilpModel reduced = problem.build_model(selected, probabilities);
  const SolveReport r = solve_bnc(reduced, {}, options);
  if (!r.has_incumbent()) return std::nullopt;
  return first_stage_values(reduced, r.solution);
}

double fixed_objective(const TwoStageProblem& problem, const FirstStage& first,
                       const BncOptions& options) {
  const SolveReport f = fix_first_stage_and_resolve(problem, first, options);
  return f.has_incumbent() ? f.objective : kInf;
}

}  // namespace

double evaluate_selection(const TwoStageProblem& problem, std::span<const int> selected,
                          std::span<const double> probabilities, const BncOptions& options) {
  const auto first = reduced_first_stage(problem, selected, probabilities, options);
  return first ? fixed_objective(problem, *first, options) : kInf;
}

std::vector<CurvePoint> convergence_curve(const TwoStageProblem& problem, std::span<const int> sizes,
                                          int repeats, std::uint64_t seed, const BncOptions& options) {
  const int n = problem.num_scenarios();
  if (repeats < 1) throw std::invalid_argument("repeats must be positive");
  for (int size : sizes) {
    if (size < 1 || size > n) throw std::invalid_argument("curve size outside [1, S]");
  }
  const DistanceMatrix d = distance_matrix(problem);
  std::mt19937_64 rng(seed);
  std::map<std::vector<std::pair<int, double>>, std::optional<FirstStage>> solved;
  std::map<FirstStage, double> known;
  auto evaluate = [&](const Reduction& r) {
    std::vector<std::pair<int, double>> key;
    for (std::size_t i = 0; i < r.selected.size(); ++i) key.emplace_back(r.selected[i], r.new_probabilities[i]);
    std::sort(key.begin(), key.end());
    auto hit = solved.find(key);
    if (hit == solved.end()) {
      hit = solved.emplace(key, reduced_first_stage(problem, r.selected, r.new_probabilities, options)).first;
    }
    const auto& first = hit->second;
    if (!first) return kInf;
    const auto it = known.find(*first);
    if (it != known.end()) return it->second;
    const double v = fixed_objective(problem, *first, options);
    known.emplace(*first, v);
    return v;
  };
  std::vector<CurvePoint> out;
  for (int size : sizes) {
    CurvePoint pt;
    pt.size = size;
    const Reduction ff = fast_forward_select(d, problem.probabilities, size);
    pt.fast_forward = evaluate(ff);
    double sum = 0.0;
    pt.random_min = kInf;
    pt.random_max = -kInf;
    for (int r = 0; r < repeats; ++r) {
      auto pool = identity(n);
      for (int i = 0; i < size; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
      }
      pool.resize(static_cast<std::size_t>(size));
      std::sort(pool.begin(), pool.end());
      const Reduction sample = redistribute(d, problem.probabilities, pool);
      const double v = evaluate(sample);
      pt.random_min = std::min(pt.random_min, v);
      pt.random_max = std::max(pt.random_max, v);
      sum += v;
    }
    pt.random_mean = sum / repeats;
    out.push_back(pt);
  }
  return out;
}

}  // namespace tulip
