// SPDX-License-Identifier: Apache-2.0

#include "tulip/lp_engine.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace tulip {

const char* lp_status_name(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
    case LpStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

std::vector<int> Basis::basic_variables() const {
  std::vector<int> out;
  for (std::size_t j = 0; j < status.size(); ++j) {
    if (status[j] == VarStatus::basic) out.push_back(static_cast<int>(j));
  }
  return out;
}

namespace {

std::pair<double, double> logical_bounds(Sense sense, double rhs) {
  switch (sense) {
    case Sense::less_equal: return {-kInf, rhs};
    case Sense::greater_equal: return {rhs, kInf};
    case Sense::equal: return {rhs, rhs};
  }
  return {-kInf, kInf};
}

}  // namespace

LpSolver::LpSolver(const LinearProgram& lp, LpOptions options) : opt_(options) {
  lp.validate();
  n_ = lp.num_vars;
  cols_.assign(n_, {});
  cost_.assign(lp.objective.data(), lp.objective.data() + n_);
  lo_ = lp.lower;
  up_ = lp.upper;
  status_.assign(n_, VarStatus::at_lower);
  x_ = Eigen::VectorXd::Zero(n_);
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  head_.clear();
  pos_.assign(n_, -1);
  factor_valid_ = false;
  const int total = n_ + lp.num_rows();
  lo_.conservativeResize(total);
  up_.conservativeResize(total);
  x_.conservativeResize(total);
  for (int i = 0; i < lp.num_rows(); ++i) append_row(lp.rows[i], lp.row_sense[i], lp.rhs[i]);
}

void LpSolver::add_row(const SparseRow& row, Sense sense, double rhs) {
  if (row.max_index() >= n_) throw StructuralError("row references unknown column");
  const int total = n_ + m_ + 1;
  lo_.conservativeResize(total);
  up_.conservativeResize(total);
  x_.conservativeResize(total);
  append_row(row, sense, rhs);
}

void LpSolver::append_row(const SparseRow& row, Sense sense, double rhs) {
  if (row.max_index() >= n_) throw StructuralError("row references unknown column");
  const int i = m_;
  const auto idx = row.indices();
  const auto val = row.values();
  for (std::size_t k = 0; k < idx.size(); ++k) cols_[idx[k]].emplace_back(i, val[k]);
  rows_.push_back(row);
  cost_.push_back(0.0);
  const auto [lo, up] = logical_bounds(sense, rhs);
  const int total = n_ + m_ + 1;
  lo_[total - 1] = lo;
  up_[total - 1] = up;
  x_[total - 1] = evaluate_row(row, x_.head(n_));
  status_.push_back(VarStatus::basic);
  pos_.push_back(m_);
  head_.push_back(total - 1);
  factor_valid_ = false;
  ++m_;
}

void LpSolver::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= n_) throw StructuralError("set_bounds: column out of range");
  if (!(lower <= upper)) throw std::invalid_argument("set_bounds: lower > upper");
  lo_[var] = lower;
  up_[var] = upper;
  if (status_[var] != VarStatus::basic) place_nonbasic(var);
}

void LpSolver::place_nonbasic(int j) {
  const bool lo_finite = std::isfinite(lo_[j]);
  const bool up_finite = std::isfinite(up_[j]);
  VarStatus& st = status_[j];
  if (st == VarStatus::at_upper && !up_finite) st = VarStatus::at_lower;
  if (st == VarStatus::at_lower && !lo_finite) st = up_finite ? VarStatus::at_upper : VarStatus::free_zero;
  if (st == VarStatus::free_zero && lo_finite) st = VarStatus::at_lower;
  if (st == VarStatus::free_zero && up_finite) st = VarStatus::at_upper;
  switch (st) {
    case VarStatus::at_lower: x_[j] = lo_[j]; break;
    case VarStatus::at_upper: x_[j] = up_[j]; break;
    case VarStatus::free_zero: x_[j] = 0.0; break;
    case VarStatus::basic: break;
  }
}

void LpSolver::slack_basis() {
  const int total = n_ + m_;
  status_.assign(total, VarStatus::at_lower);
  pos_.assign(total, -1);
  head_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    status_[n_ + i] = VarStatus::basic;
    pos_[n_ + i] = i;
  }
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  refactor();
}

bool LpSolver::install_basis(const Basis* warm) {
  if (warm == nullptr) {
    slack_basis();
    return true;
  }
  const int total = n_ + m_;
  const int given = static_cast<int>(warm->status.size());
  if (given < n_ || given > total) return false;
  std::vector<VarStatus> next(warm->status);
  next.resize(total, VarStatus::basic);
  if (std::count(next.begin(), next.end(), VarStatus::basic) != m_) return false;

  bool same_basic_set = factor_valid_ && static_cast<int>(status_.size()) == total;
  for (int j = 0; same_basic_set && j < total; ++j) {
    same_basic_set = (next[j] == VarStatus::basic) == (status_[j] == VarStatus::basic);
  }
  status_ = std::move(next);
  for (int j = 0; j < total; ++j) {
    if (status_[j] != VarStatus::basic) place_nonbasic(j);
  }
  if (same_basic_set) return true;
  if (factor_valid_ && static_cast<int>(head_.size()) == m_ && pivot_to_basis()) return true;

  head_.clear();
  pos_.assign(total, -1);
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::basic) {
      pos_[j] = static_cast<int>(head_.size());
      head_.push_back(j);
    }
  }
  return refactor();
}

bool LpSolver::pivot_to_basis() {
  std::vector<int> entering;
  std::vector<int> leaving_rows;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::basic && pos_[j] < 0) entering.push_back(j);
  }
  for (int k = 0; k < m_; ++k) {
    if (status_[head_[k]] != VarStatus::basic) leaving_rows.push_back(k);
  }
  if (entering.size() != leaving_rows.size() ||
      static_cast<int>(entering.size()) > std::max(4, m_ / 8) ||
      updates_since_refactor_ + static_cast<int>(entering.size()) > opt_.refactor_interval) {
    return false;
  }
  Eigen::VectorXd alpha;
  std::vector<char> used(leaving_rows.size(), 0);
  for (int j : entering) {
    ftran(j, alpha);
    int pick = -1;
    for (std::size_t r = 0; r < leaving_rows.size(); ++r) {
      if (used[r]) continue;
      if (pick < 0 || std::abs(alpha[leaving_rows[r]]) > std::abs(alpha[leaving_rows[pick]])) {
        pick = static_cast<int>(r);
      }
    }
    if (std::abs(alpha[leaving_rows[pick]]) < 1e-7) return false;
    used[pick] = 1;
    const int row = leaving_rows[pick];
    const int out = head_[row];
    const VarStatus keep = status_[out];
    pivot(row, j, alpha);
    status_[out] = keep;
  }
  return true;
}

bool LpSolver::factorize(double accuracy_tol) {
  etas_.clear();
  updates_since_refactor_ = 0;
  factor_valid_ = false;
  if (m_ == 0) {
    factor_valid_ = true;
    return true;
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (j < n_) {
      for (const auto& [row, coef] : cols_[j]) entries.emplace_back(row, k, coef);
    } else {
      entries.emplace_back(j - n_, k, -1.0);
    }
  }
  Eigen::SparseMatrix<double> basis(m_, m_);
  basis.setFromTriplets(entries.begin(), entries.end());
  lu_.analyzePattern(basis);
  lu_.factorize(basis);
  if (lu_.info() != Eigen::Success) return false;

  // Round trip on a fixed vector to reject nearly singular bases.
  Eigen::VectorXd probe(m_);
  for (int k = 0; k < m_; ++k) probe[k] = 1.0 + 0.125 * (k % 7);
  const Eigen::VectorXd image = basis * probe;
  const Eigen::VectorXd back = lu_.solve(image);
  if (!((back - probe).lpNorm<Eigen::Infinity>() <= accuracy_tol)) return false;
  factor_valid_ = true;
  return true;
}

bool LpSolver::refactor() {
  if (factorize(1e-7)) return true;

  // Singular basis: keep a maximal independent subset of the basic columns and
  // complete it with logicals of the rows that subset leaves uncovered.
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m_, m_);
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (j < n_) {
      for (const auto& [row, coef] : cols_[j]) basis(row, k) = coef;
    } else {
      basis(j - n_, k) = -1.0;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> full(basis);
  full.setThreshold(1e-11);
  const int rank = static_cast<int>(full.rank());
  const auto& q = full.permutationQ().indices();
  const auto& p = full.permutationP().indices();
  std::vector<char> keep(m_, 0);
  for (int k = 0; k < rank; ++k) keep[q[k]] = 1;
  std::vector<int> free_rows;
  for (int i = 0; i < m_; ++i) {
    if (p[i] >= rank) free_rows.push_back(i);
  }
  std::size_t next_row = 0;
  for (int k = 0; k < m_; ++k) {
    if (keep[k]) continue;
    const int out = head_[k];
    status_[out] = (std::isfinite(lo_[out]) && std::isfinite(up_[out]) &&
                    std::abs(x_[out] - up_[out]) < std::abs(x_[out] - lo_[out]))
                       ? VarStatus::at_upper
                       : VarStatus::at_lower;
    pos_[out] = -1;
    place_nonbasic(out);
    const int in = n_ + free_rows.at(next_row++);
    head_[k] = in;
    pos_[in] = k;
    status_[in] = VarStatus::basic;
  }
  return factorize(1e-5);
}

void LpSolver::ftran_in_place(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  Eigen::VectorXd w = lu_.solve(v);
  for (const auto& eta : etas_) {
    const double t = w[eta.row] / eta.pivot;
    if (t != 0.0) {
      for (const auto& [k, a] : eta.entries) w[k] -= a * t;
    }
    w[eta.row] = t;
  }
  v.swap(w);
}

void LpSolver::btran_in_place(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double t = v[it->row];
    for (const auto& [k, a] : it->entries) t -= a * v[k];
    v[it->row] = t / it->pivot;
  }
  Eigen::VectorXd w = lu_.transpose().solve(v);
  v.swap(w);
}

void LpSolver::compute_basic_values() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::basic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (const auto& [row, coef] : cols_[j]) rhs[row] += coef * x_[j];
    } else {
      rhs[j - n_] -= x_[j];
    }
  }
  ftran_in_place(rhs);
  for (int k = 0; k < m_; ++k) x_[head_[k]] = -rhs[k];
}

double LpSolver::column_dot(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (const auto& [row, coef] : cols_[j]) s += coef * y[row];
  return s;
}

void LpSolver::compute_duals(const Eigen::VectorXd& basic_costs) {
  y_ = basic_costs;
  btran_in_place(y_);
  d_.resize(n_ + m_);
  for (int j = 0; j < n_ + m_; ++j) {
    d_[j] = status_[j] == VarStatus::basic ? 0.0 : cost_[j] - column_dot(j, y_);
  }
}

void LpSolver::ftran(int j, Eigen::VectorXd& alpha) const {
  alpha = Eigen::VectorXd::Zero(m_);
  if (j >= n_) {
    alpha[j - n_] = -1.0;
  } else {
    for (const auto& [row, coef] : cols_[j]) alpha[row] = coef;
  }
  ftran_in_place(alpha);
}

void LpSolver::pivot(int row, int entering, const Eigen::VectorXd& alpha) {
  Eta eta;
  eta.row = row;
  eta.pivot = alpha[row];
  for (int k = 0; k < m_; ++k) {
    if (k != row && alpha[k] != 0.0) eta.entries.emplace_back(k, alpha[k]);
  }
  etas_.push_back(std::move(eta));
  const int leaving = head_[row];
  pos_[leaving] = -1;
  head_[row] = entering;
  pos_[entering] = row;
  status_[entering] = VarStatus::basic;
  ++updates_since_refactor_;
}

double LpSolver::primal_infeasibility(int j) const {
  return std::max({lo_[j] - x_[j], x_[j] - up_[j], 0.0});
}

bool LpSolver::past_deadline() const {
  return iterations_ % 64 == 63 && std::chrono::steady_clock::now() > opt_.deadline;
}

bool LpSolver::primal_feasible() const {
  for (int k = 0; k < m_; ++k) {
    if (primal_infeasibility(head_[k]) > opt_.primal_tol) return false;
  }
  return true;
}

bool LpSolver::dual_feasible_after_flips() {
  Eigen::VectorXd cb(m_);
  for (int k = 0; k < m_; ++k) cb[k] = cost_[head_[k]];
  compute_duals(cb);
  bool flipped = false;
  bool feasible = true;
  for (int j = 0; j < n_ + m_; ++j) {
    const VarStatus st = status_[j];
    if (st == VarStatus::basic || lo_[j] == up_[j]) continue;
    const bool boxed = std::isfinite(lo_[j]) && std::isfinite(up_[j]);
    if (st == VarStatus::at_lower && d_[j] < -opt_.dual_tol) {
      if (!boxed) { feasible = false; continue; }
      status_[j] = VarStatus::at_upper;
      x_[j] = up_[j];
      flipped = true;
    } else if (st == VarStatus::at_upper && d_[j] > opt_.dual_tol) {
      if (!boxed) { feasible = false; continue; }
      status_[j] = VarStatus::at_lower;
      x_[j] = lo_[j];
      flipped = true;
    } else if (st == VarStatus::free_zero && std::abs(d_[j]) > opt_.dual_tol) {
      feasible = false;
    }
  }
  if (flipped) compute_basic_values();
  return feasible;
}

LpSolver::Outcome LpSolver::primal_simplex(bool phase_one) {
  const long degenerate_limit = 2L * (n_ + m_);
  long degenerate_run = 0;
  Eigen::VectorXd cb(m_);
  Eigen::VectorXd alpha;
  while (true) {
    if (iterations_ >= opt_.max_iterations) return Outcome::failure;
    if (past_deadline()) return Outcome::time_limit;
    if (updates_since_refactor_ >= opt_.refactor_interval) {
      if (!refactor()) return Outcome::failure;
      compute_basic_values();
    }
    bool any_infeasible = false;
    for (int k = 0; k < m_; ++k) {
      const int b = head_[k];
      if (!phase_one) {
        cb[k] = cost_[b];
      } else if (x_[b] < lo_[b] - opt_.primal_tol) {
        cb[k] = -1.0;
        any_infeasible = true;
      } else if (x_[b] > up_[b] + opt_.primal_tol) {
        cb[k] = 1.0;
        any_infeasible = true;
      } else {
        cb[k] = 0.0;
      }
    }
    if (phase_one && !any_infeasible) return Outcome::optimal;

    y_ = cb;
    btran_in_place(y_);
    int entering = -1;
    double best = 0.0;
    double entering_d = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::basic || lo_[j] == up_[j]) continue;
      const double dj = (phase_one ? 0.0 : cost_[j]) - column_dot(j, y_);
      bool eligible = false;
      if (st == VarStatus::at_lower) eligible = dj < -opt_.dual_tol;
      else if (st == VarStatus::at_upper) eligible = dj > opt_.dual_tol;
      else eligible = std::abs(dj) > opt_.dual_tol;
      if (!eligible) continue;
      if (bland_) {
        entering = j;
        entering_d = dj;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        entering = j;
        entering_d = dj;
      }
    }
    if (entering < 0) return phase_one ? Outcome::infeasible : Outcome::optimal;

    const double dir = entering_d < 0.0 ? 1.0 : -1.0;
    ftran(entering, alpha);

    double theta = kInf;
    int leave_row = -1;
    bool leave_to_upper = false;
    if (std::isfinite(lo_[entering]) && std::isfinite(up_[entering])) {
      theta = up_[entering] - lo_[entering];
    }
    double leave_pivot = 0.0;
    for (int k = 0; k < m_; ++k) {
      const double rate = -dir * alpha[k];
      if (std::abs(rate) < opt_.pivot_tol) continue;
      const int b = head_[k];
      const double xv = x_[b];
      double limit = kInf;
      bool to_upper = false;
      if (rate > 0.0) {
        if (phase_one && xv < lo_[b] - opt_.primal_tol) {
          limit = (lo_[b] - xv) / rate;
        } else if (phase_one && xv > up_[b] + opt_.primal_tol) {
          continue;
        } else if (std::isfinite(up_[b])) {
          limit = std::max(0.0, up_[b] - xv) / rate;
          to_upper = true;
        }
      } else {
        if (phase_one && xv > up_[b] + opt_.primal_tol) {
          limit = (xv - up_[b]) / -rate;
          to_upper = true;
        } else if (phase_one && xv < lo_[b] - opt_.primal_tol) {
          continue;
        } else if (std::isfinite(lo_[b])) {
          limit = std::max(0.0, xv - lo_[b]) / -rate;
        }
      }
      if (!std::isfinite(limit)) continue;
      bool better = false;
      if (limit < theta - 1e-12) {
        better = true;
      } else if (limit <= theta + 1e-12 && leave_row >= 0) {
        better = bland_ ? b < head_[leave_row] : std::abs(alpha[k]) > leave_pivot;
      }
      if (better) {
        theta = std::min(theta, limit);
        leave_row = k;
        leave_to_upper = to_upper;
        leave_pivot = std::abs(alpha[k]);
      }
    }
    if (!std::isfinite(theta)) return phase_one ? Outcome::failure : Outcome::unbounded;

    if (theta <= 1e-12) {
      if (++degenerate_run > degenerate_limit) bland_ = true;
    } else {
      degenerate_run = 0;
    }

    if (theta != 0.0) {
      x_[entering] += dir * theta;
      for (int k = 0; k < m_; ++k) x_[head_[k]] -= dir * theta * alpha[k];
    }
    ++iterations_;
    if (leave_row < 0) {
      status_[entering] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
      x_[entering] = dir > 0 ? up_[entering] : lo_[entering];
      continue;
    }
    const int leaving = head_[leave_row];
    pivot(leave_row, entering, alpha);
    status_[leaving] = leave_to_upper ? VarStatus::at_upper : VarStatus::at_lower;
    x_[leaving] = leave_to_upper ? up_[leaving] : lo_[leaving];
  }
}

LpSolver::Outcome LpSolver::dual_simplex() {
  const std::vector<double> original_cost = cost_;
  for (int j = 0; j < n_; ++j) {
    const VarStatus st = status_[j];
    if (st == VarStatus::basic || st == VarStatus::free_zero || lo_[j] == up_[j]) continue;
    const auto spread = static_cast<double>(static_cast<std::uint64_t>(j) * 2654435761u % 1000);
    const double delta = opt_.cost_perturbation * (1.0 + std::abs(cost_[j])) * (1.0 + spread / 1000.0);
    cost_[j] += st == VarStatus::at_lower ? delta : -delta;
  }
  const Outcome out = dual_simplex_loop();
  cost_ = original_cost;
  return out;
}

LpSolver::Outcome LpSolver::dual_simplex_loop() {
  const long degenerate_limit = 2L * (n_ + m_);
  long degenerate_run = 0;
  Eigen::VectorXd cb(m_);
  Eigen::VectorXd alpha;
  Eigen::VectorXd rho;
  std::vector<double> row_alpha(n_ + m_, 0.0);
  bool fresh = false;
  bool duals_current = false;
  std::vector<double> weight(m_, 1.0);
  while (true) {
    if (iterations_ >= opt_.max_iterations) return Outcome::failure;
    if (past_deadline()) return Outcome::time_limit;
    if (updates_since_refactor_ >= opt_.refactor_interval) {
      if (!refactor()) return Outcome::failure;
      compute_basic_values();
      fresh = true;
      duals_current = false;
    }
    int leave_row = -1;
    double worst = 0.0;
    for (int k = 0; k < m_; ++k) {
      const double infeas = primal_infeasibility(head_[k]);
      if (infeas <= opt_.primal_tol) continue;
      if (bland_) {
        if (leave_row < 0 || head_[k] < head_[leave_row]) leave_row = k;
      } else if (infeas * infeas > worst * weight[k]) {
        worst = infeas * infeas / weight[k];
        leave_row = k;
      }
    }
    if (leave_row < 0) return Outcome::optimal;

    if (!duals_current) {
      for (int k = 0; k < m_; ++k) cb[k] = cost_[head_[k]];
      compute_duals(cb);
      duals_current = true;
    }

    const int leaving = head_[leave_row];
    const bool below = x_[leaving] < lo_[leaving];
    const double delta = below ? x_[leaving] - lo_[leaving] : x_[leaving] - up_[leaving];
    rho = Eigen::VectorXd::Unit(m_, leave_row);
    btran_in_place(rho);

    // Harris two-pass ratio test on d_j / alpha~_j.
    double bound = kInf;
    for (int j = 0; j < n_ + m_; ++j) {
      const VarStatus st = status_[j];
      row_alpha[j] = 0.0;
      if (st == VarStatus::basic || lo_[j] == up_[j]) continue;
      const double a = column_dot(j, rho);
      row_alpha[j] = a;
      const double at = below ? -a : a;
      bool eligible = false;
      if (st == VarStatus::at_lower) eligible = at > opt_.pivot_tol;
      else if (st == VarStatus::at_upper) eligible = at < -opt_.pivot_tol;
      else eligible = std::abs(at) > opt_.pivot_tol;
      if (!eligible) continue;
      bound = std::min(bound, (std::abs(d_[j]) + opt_.dual_tol) / std::abs(at));
    }
    if (!std::isfinite(bound)) {
      if (fresh) return Outcome::infeasible;
      if (!refactor()) return Outcome::failure;
      compute_basic_values();
      fresh = true;
      duals_current = false;
      continue;
    }
    int entering = -1;
    double best_pivot = 0.0;
    double best_ratio = kInf;
    for (int j = 0; j < n_ + m_; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::basic || lo_[j] == up_[j]) continue;
      const double at = below ? -row_alpha[j] : row_alpha[j];
      bool eligible = false;
      if (st == VarStatus::at_lower) eligible = at > opt_.pivot_tol;
      else if (st == VarStatus::at_upper) eligible = at < -opt_.pivot_tol;
      else eligible = std::abs(at) > opt_.pivot_tol;
      if (!eligible) continue;
      const double ratio = std::abs(d_[j]) / std::abs(at);
      if (bland_) {
        if (ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          entering = j;
        }
      } else if (ratio <= bound && std::abs(at) > best_pivot) {
        best_pivot = std::abs(at);
        best_ratio = ratio;
        entering = j;
      }
    }
    if (entering < 0) return Outcome::failure;

    ftran(entering, alpha);
    const double pivot_value = alpha[leave_row];
    if (std::abs(pivot_value - row_alpha[entering]) >
            1e-7 * std::max(1.0, std::abs(pivot_value)) ||
        std::abs(pivot_value) < opt_.pivot_tol) {
      if (fresh) return Outcome::failure;
      if (!refactor()) return Outcome::failure;
      compute_basic_values();
      fresh = true;
      duals_current = false;
      continue;
    }
    fresh = false;

    if (best_ratio <= 1e-12) {
      if (++degenerate_run > degenerate_limit) bland_ = true;
    } else {
      degenerate_run = 0;
    }

    const double theta = delta / pivot_value;
    x_[entering] += theta;
    for (int k = 0; k < m_; ++k) x_[head_[k]] -= theta * alpha[k];
    ++iterations_;
    const double step = d_[entering] / row_alpha[entering];
    for (int j = 0; j < n_ + m_; ++j) {
      if (row_alpha[j] != 0.0) d_[j] -= step * row_alpha[j];
    }
    d_[entering] = 0.0;
    d_[leaving] = -step;
    const double pivot_weight = weight[leave_row];
    for (int k = 0; k < m_; ++k) {
      if (k == leave_row || alpha[k] == 0.0) continue;
      const double ratio = alpha[k] / pivot_value;
      weight[k] = std::max(weight[k], ratio * ratio * pivot_weight);
    }
    weight[leave_row] = std::max(pivot_weight / (pivot_value * pivot_value), 1.0);
    pivot(leave_row, entering, alpha);
    status_[leaving] = below ? VarStatus::at_lower : VarStatus::at_upper;
    x_[leaving] = below ? lo_[leaving] : up_[leaving];
  }
}

bool LpSolver::residual_ok() const {
  const double tol = opt_.feasibility_check_tol;
  for (int j = 0; j < n_; ++j) {
    if (x_[j] < lo_[j] - tol * std::max(1.0, std::abs(lo_[j]))) return false;
    if (x_[j] > up_[j] + tol * std::max(1.0, std::abs(up_[j]))) return false;
  }
  for (int i = 0; i < m_; ++i) {
    const double activity = evaluate_row(rows_[i], x_.head(n_));
    const double lo = lo_[n_ + i];
    const double up = up_[n_ + i];
    if (activity < lo - tol * std::max(1.0, std::abs(lo))) return false;
    if (activity > up + tol * std::max(1.0, std::abs(up))) return false;
  }
  return true;
}

LpSolver::Outcome LpSolver::run_from_current_basis() {
  for (int attempt = 0; attempt < 4; ++attempt) {
    compute_basic_values();
    const bool dual_ok = dual_feasible_after_flips();
    if (dual_ok && !primal_feasible()) {
      const Outcome out = dual_simplex();
      if (out == Outcome::infeasible || out == Outcome::time_limit) return out;
    }
    if (!primal_feasible()) {
      const Outcome out = primal_simplex(true);
      if (out != Outcome::optimal) return out;
    }
    const Outcome out = primal_simplex(false);
    if (out != Outcome::optimal) return out;
    compute_basic_values();
    if (primal_feasible() && residual_ok()) return Outcome::optimal;
    if (!refactor()) return Outcome::failure;
  }
  return Outcome::failure;
}

LpSolution LpSolver::make_solution(Outcome outcome) {
  LpSolution sol;
  switch (outcome) {
    case Outcome::optimal: sol.status = LpStatus::optimal; break;
    case Outcome::infeasible: sol.status = LpStatus::infeasible; break;
    case Outcome::unbounded: sol.status = LpStatus::unbounded; break;
    case Outcome::failure: sol.status = LpStatus::numerical_failure; break;
    case Outcome::time_limit: sol.status = LpStatus::time_limit; break;
  }
  sol.point = x_.head(n_);
  sol.objective = 0.0;
  for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * x_[j];
  sol.basis.status = status_;
  sol.basic = head_;
  sol.iterations = iterations_;
  if (outcome == Outcome::optimal) {
    Eigen::VectorXd cb(m_);
    for (int k = 0; k < m_; ++k) cb[k] = cost_[head_[k]];
    compute_duals(cb);
    sol.row_duals = y_;
    sol.reduced_costs = d_.head(n_);
  }
  return sol;
}

LpSolution LpSolver::solve(const Basis* warm) {
  iterations_ = 0;
  bland_ = false;
  Outcome outcome = Outcome::failure;
  bool warm_used = false;
  if (warm != nullptr && install_basis(warm)) {
    warm_used = true;
    outcome = run_from_current_basis();
  }
  if (!warm_used || outcome == Outcome::failure) {
    const long spent = iterations_;
    slack_basis();
    bland_ = false;
    outcome = run_from_current_basis();
    iterations_ += spent;
  }
  return make_solution(outcome);
}

LpSolution solve_lp(const LinearProgram& lp, const Basis* warm_basis, const LpOptions& options) {
  LpSolver solver(lp, options);
  return solver.solve(warm_basis);
}

}  // namespace tulip
