// SPDX-License-Identifier: Apache-2.0
//
// LP-based branch-and-cut with lazy constraints, the root cutting-plane loop
// and the tight-cut filter used for warm starting.

#pragma once

#include "tulip/core_model.hpp"
#include "tulip/lp_engine.hpp"

#include <chrono>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

namespace tulip {

/// Canonical text of a cut (sense, rhs, sorted terms) used for deduplication.
std::string cut_key(const Cut& cut);

class CutPool {
 public:
  /// Returns false (and drops the cut) when an identical cut is already stored.
  bool add(Cut cut);
  bool contains(const Cut& cut) const { return keys_.count(cut_key(cut)) > 0; }
  const std::vector<Cut>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }
  bool empty() const { return cuts_.empty(); }

 private:
  std::vector<Cut> cuts_;
  std::unordered_set<std::string> keys_;
};

using Clock = std::chrono::steady_clock;

struct BncOptions {
  /// Wall-clock budget in seconds, measured from the start of the call.
  double time_limit = 120.0;
  int root_round_limit = 200;
  /// Fractional points are separated at the root and at every n-th node.
  int fractional_separation_interval = 8;
  /// Optional CSV event log: one line per processed node.
  std::ostream* event_log = nullptr;
  LpOptions lp;
};

struct RootResult {
  SolveStatus status = SolveStatus::optimal;
  LpSolution lp;
  CutPool pool;
  int rounds = 0;
  /// Objective of the first LP relaxation, before any cut.
  double initial_bound = -kInf;
};

/// Cutting-plane loop at the root: solve, separate, append, re-solve until
/// no separator returns a new cut or the round limit is reached. A status of
/// time_limit means the loop stopped early; the pool is still valid.
RootResult solve_root(const MilpModel& model, const BncOptions& options = {});

/// Cuts whose slack at `point` is at most `tight_tolerance`, in pool order.
CutPool filter_tight(const CutPool& pool, const Eigen::VectorXd& point,
                     double tight_tolerance = kTightTolerance);

bool is_integral_point(const MilpModel& model, const Eigen::VectorXd& point,
                       double tolerance = kIntegralityTolerance);

/// Best-bound branch-and-cut. `initial_cuts` are installed as rows before the
/// root solve and are not counted in `cuts_added`.
SolveReport solve_bnc(const MilpModel& model, const CutPool& initial_cuts = {},
                      const BncOptions& options = {});

}  // namespace tulip
