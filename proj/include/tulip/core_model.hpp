// SPDX-License-Identifier: Apache-2.0
//
// Shared representation of linear programs, MILPs, cuts and two-stage
// stochastic structure. Everything is in minimization form.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tulip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Slack at or below this value classifies a cut as tight.
inline constexpr double kTightTolerance = 1e-6;
/// A separator may only return cuts violated by more than this.
inline constexpr double kViolationTolerance = 1e-6;
inline constexpr double kIntegralityTolerance = 1e-6;

enum class Sense : std::uint8_t { less_equal, greater_equal, equal };

char sense_code(Sense sense);
Sense parse_sense_code(char code);

/// Raised when a model violates one of its structural invariants.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by every text reader in the library; carries the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Sparse linear form stored as (index, coefficient) pairs sorted by index.
/// Duplicate indices are merged on construction; exact zeros are dropped.
class SparseRow {
 public:
  SparseRow() = default;
  explicit SparseRow(std::vector<std::pair<int, double>> terms);

  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  std::span<const int> indices() const { return index_; }
  std::span<const double> values() const { return value_; }
  int max_index() const { return index_.empty() ? -1 : index_.back(); }

  friend bool operator==(const SparseRow&, const SparseRow&) = default;

 private:
  std::vector<int> index_;
  std::vector<double> value_;
};

double evaluate_row(const SparseRow& row, Eigen::Ref<const Eigen::VectorXd> point);

struct LinearProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<SparseRow> rows;
  std::vector<Sense> row_sense;
  std::vector<double> rhs;

  LinearProgram() = default;
  explicit LinearProgram(int n);

  int num_rows() const { return static_cast<int>(rows.size()); }
  int add_var(double cost, double lo, double hi);
  void add_row(SparseRow row, Sense sense, double right_hand_side);
  /// Throws StructuralError if an index is out of range or a bound pair is crossed.
  void validate() const;
};

struct VarMeta {
  /// 0 for first-stage columns, s >= 1 for the s-th scenario block of the model.
  int stage = 0;
  /// Position of the column inside its stage block. Blocks built from the
  /// same scenario data get the same roles, which makes cut transfer a
  /// column remap.
  int role = 0;
};

enum class CutOrigin : std::uint8_t { subtour, capacity, connectivity };
inline constexpr std::size_t kNumCutOrigins = 3;
const char* cut_origin_name(CutOrigin origin);

struct Cut {
  SparseRow row;
  Sense sense = Sense::greater_equal;
  double rhs = 0.0;
  CutOrigin origin = CutOrigin::subtour;
  int scenario = 0;
  /// Vertex set Q (routing) or cut-set H (Steiner forest).
  std::vector<int> aux;
};

/// Positive when satisfied with room to spare, zero when tight, negative when violated.
double cut_slack(const Cut& cut, const Eigen::VectorXd& point);
inline double cut_violation(const Cut& cut, const Eigen::VectorXd& point) {
  return -cut_slack(cut, point);
}

class MilpModel;

/// Re-entrant cut generator. `integral` says whether the point is integral on
/// every integer-marked column (lazy-constraint regime) or fractional.
class Separator {
 public:
  virtual ~Separator() = default;
  virtual std::vector<Cut> separate(const MilpModel& model, const Eigen::VectorXd& point,
                                    bool integral) const = 0;
};

class MilpModel {
 public:
  LinearProgram lp;
  std::vector<char> integral;
  std::vector<VarMeta> var_meta;
  std::vector<std::shared_ptr<const Separator>> separators;
  /// Number of scenario blocks (stages 1..num_scenarios).
  int num_scenarios = 0;
  /// Original scenario index of each local scenario block, 0-based; empty
  /// means identity.
  std::vector<int> scenario_ids;

  int num_vars() const { return lp.num_vars; }
  int add_var(double cost, double lo, double hi, bool is_integral, VarMeta meta);
  int original_scenario(int local_stage) const;
  void validate() const;
};

/// Probabilities plus per-scenario payload of a two-stage program.
template <class Payload>
struct ScenarioSet {
  std::vector<double> probabilities;
  std::vector<Payload> payload;

  int size() const { return static_cast<int>(probabilities.size()); }
};

/// Throws std::invalid_argument unless all entries are positive and sum to 1 within 1e-12.
void validate_probabilities(std::span<const double> probabilities);

enum class SolveStatus : std::uint8_t { optimal, time_limit, infeasible };
const char* status_name(SolveStatus status);

double relative_gap(double objective, double bound);

struct PhaseTimes {
  double reduction = 0.0;
  double root = 0.0;
  double full = 0.0;
  double total() const { return reduction + root + full; }
};

struct SolveReport {
  SolveStatus status = SolveStatus::infeasible;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  long nodes = 0;
  std::array<long, kNumCutOrigins> cuts_added{};
  long cuts_transferred = 0;
  long pool_size = 0;
  double tight_ratio = 1.0;
  PhaseTimes wall_time;
  /// Incumbent point; empty when there is none.
  Eigen::VectorXd solution;

  bool has_incumbent() const { return solution.size() > 0; }
  long total_cuts() const { return cuts_added[0] + cuts_added[1] + cuts_added[2]; }
};

/// Writes the plain-text dump described in docs/formats.md.
void write_milp_text(std::ostream& out, const MilpModel& model);
/// Reads a dump back; separators are not serialized.
MilpModel read_milp_text(std::istream& in);

}  // namespace tulip
