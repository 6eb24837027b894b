// SPDX-License-Identifier: Apache-2.0

#include "tulip/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tulip {

char sense_code(Sense sense) {
  switch (sense) {
    case Sense::less_equal: return 'L';
    case Sense::greater_equal: return 'G';
    case Sense::equal: return 'E';
  }
  return '?';
}

Sense parse_sense_code(char code) {
  switch (code) {
    case 'L': return Sense::less_equal;
    case 'G': return Sense::greater_equal;
    case 'E': return Sense::equal;
    default: throw std::invalid_argument(std::string("unknown sense code '") + code + "'");
  }
}

SparseRow::SparseRow(std::vector<std::pair<int, double>> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  index_.reserve(terms.size());
  value_.reserve(terms.size());
  for (const auto& [idx, coef] : terms) {
    if (idx < 0) throw StructuralError("negative column index in sparse row");
    if (!index_.empty() && index_.back() == idx) {
      value_.back() += coef;
    } else {
      index_.push_back(idx);
      value_.push_back(coef);
    }
  }
  std::size_t kept = 0;
  for (std::size_t k = 0; k < index_.size(); ++k) {
    if (value_[k] == 0.0) continue;
    index_[kept] = index_[k];
    value_[kept] = value_[k];
    ++kept;
  }
  index_.resize(kept);
  value_.resize(kept);
}

double evaluate_row(const SparseRow& row, Eigen::Ref<const Eigen::VectorXd> point) {
  if (row.max_index() >= point.size()) {
    throw StructuralError("sparse row index " + std::to_string(row.max_index()) +
                          " out of range for point of length " + std::to_string(point.size()));
  }
  double sum = 0.0;
  const auto idx = row.indices();
  const auto val = row.values();
  for (std::size_t k = 0; k < idx.size(); ++k) sum += val[k] * point[idx[k]];
  return sum;
}

LinearProgram::LinearProgram(int n)
    : num_vars(n),
      objective(Eigen::VectorXd::Zero(n)),
      lower(Eigen::VectorXd::Zero(n)),
      upper(Eigen::VectorXd::Constant(n, kInf)) {}

int LinearProgram::add_var(double cost, double lo, double hi) {
  const int j = num_vars++;
  objective.conservativeResize(num_vars);
  lower.conservativeResize(num_vars);
  upper.conservativeResize(num_vars);
  objective[j] = cost;
  lower[j] = lo;
  upper[j] = hi;
  return j;
}

void LinearProgram::add_row(SparseRow row, Sense sense, double right_hand_side) {
  rows.push_back(std::move(row));
  row_sense.push_back(sense);
  rhs.push_back(right_hand_side);
}

void LinearProgram::validate() const {
  if (objective.size() != num_vars || lower.size() != num_vars || upper.size() != num_vars) {
    throw StructuralError("objective/bound vectors do not match num_vars");
  }
  if (row_sense.size() != rows.size() || rhs.size() != rows.size()) {
    throw StructuralError("row sense/rhs length mismatch");
  }
  for (int j = 0; j < num_vars; ++j) {
    if (!(lower[j] <= upper[j])) {
      throw StructuralError("variable " + std::to_string(j) + " has lower > upper");
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].max_index() >= num_vars) {
      throw StructuralError("row " + std::to_string(i) + " references column " +
                            std::to_string(rows[i].max_index()));
    }
  }
}

const char* cut_origin_name(CutOrigin origin) {
  switch (origin) {
    case CutOrigin::subtour: return "subtour";
    case CutOrigin::capacity: return "capacity";
    case CutOrigin::connectivity: return "connectivity";
  }
  return "unknown";
}

double cut_slack(const Cut& cut, const Eigen::VectorXd& point) {
  const double activity = evaluate_row(cut.row, point);
  switch (cut.sense) {
    case Sense::greater_equal: return activity - cut.rhs;
    case Sense::less_equal: return cut.rhs - activity;
    case Sense::equal: return -std::abs(activity - cut.rhs);
  }
  return 0.0;
}

int MilpModel::add_var(double cost, double lo, double hi, bool is_integral, VarMeta meta) {
  integral.push_back(is_integral ? 1 : 0);
  var_meta.push_back(meta);
  return lp.add_var(cost, lo, hi);
}

int MilpModel::original_scenario(int local_stage) const {
  if (local_stage <= 0) return -1;
  if (scenario_ids.empty()) return local_stage - 1;
  return scenario_ids.at(static_cast<std::size_t>(local_stage - 1));
}

void MilpModel::validate() const {
  lp.validate();
  if (static_cast<int>(integral.size()) != lp.num_vars) {
    throw StructuralError("integrality mask length differs from num_vars");
  }
  if (static_cast<int>(var_meta.size()) != lp.num_vars) {
    throw StructuralError("variable metadata length differs from num_vars");
  }
  for (const auto& meta : var_meta) {
    if (meta.stage < 0 || meta.stage > num_scenarios) {
      throw StructuralError("variable stage " + std::to_string(meta.stage) +
                            " outside 0.." + std::to_string(num_scenarios));
    }
  }
  if (!scenario_ids.empty() && static_cast<int>(scenario_ids.size()) != num_scenarios) {
    throw StructuralError("scenario id map does not cover every scenario block");
  }
}

void validate_probabilities(std::span<const double> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("empty scenario set");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("scenario probability outside (0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("scenario probabilities sum to " + std::to_string(sum));
  }
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::time_limit: return "time_limit";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

double relative_gap(double objective, double bound) {
  if (!std::isfinite(objective) || !std::isfinite(bound)) return kInf;
  const double gap = (objective - bound) / std::max(std::abs(objective), 1e-10);
  return std::max(gap, 0.0);
}

namespace {

std::string format_double(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, int line) {
  if (token == "inf" || token == "+inf") return kInf;
  if (token == "-inf") return -kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw ParseError("malformed number '" + token + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("malformed number '" + token + "'", line);
  }
}

int parse_int(const std::string& token, int line) {
  int v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("malformed integer '" + token + "'", line);
  return v;
}

}  // namespace

void write_milp_text(std::ostream& out, const MilpModel& model) {
  const auto& lp = model.lp;
  out << "milp " << lp.num_vars << ' ' << lp.num_rows() << ' ' << model.num_scenarios << '\n';
  if (!model.scenario_ids.empty()) {
    out << "scenarios";
    for (int id : model.scenario_ids) out << ' ' << id;
    out << '\n';
  }
  for (int j = 0; j < lp.num_vars; ++j) {
    out << "var " << j << ' ' << format_double(lp.objective[j]) << ' '
        << format_double(lp.lower[j]) << ' ' << format_double(lp.upper[j]) << ' '
        << (model.integral[j] ? 'I' : 'C') << ' ' << model.var_meta[j].stage << ' '
        << model.var_meta[j].role << '\n';
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    out << "row " << sense_code(lp.row_sense[i]) << ' ' << format_double(lp.rhs[i]) << ' '
        << row.size();
    for (std::size_t k = 0; k < row.size(); ++k) {
      out << ' ' << row.indices()[k] << ':' << format_double(row.values()[k]);
    }
    out << '\n';
  }
  out << "end\n";
}

MilpModel read_milp_text(std::istream& in) {
  MilpModel model;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  bool done = false;
  int expected_vars = 0;
  int expected_rows = 0;
  while (!done && std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string kw;
    if (!(ss >> kw) || kw[0] == '#') continue;
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (kw == "milp") {
      if (tok.size() != 3) throw ParseError("milp header needs 3 fields", line_no);
      expected_vars = parse_int(tok[0], line_no);
      expected_rows = parse_int(tok[1], line_no);
      model.num_scenarios = parse_int(tok[2], line_no);
      have_header = true;
    } else if (!have_header) {
      throw ParseError("expected 'milp' header", line_no);
    } else if (kw == "scenarios") {
      for (const auto& t : tok) model.scenario_ids.push_back(parse_int(t, line_no));
    } else if (kw == "var") {
      if (tok.size() != 7) throw ParseError("var line needs 7 fields", line_no);
      if (parse_int(tok[0], line_no) != model.lp.num_vars) {
        throw ParseError("variables must be listed in order", line_no);
      }
      if (tok[4] != "I" && tok[4] != "C") throw ParseError("type must be I or C", line_no);
      model.add_var(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                    parse_double(tok[3], line_no), tok[4] == "I",
                    VarMeta{parse_int(tok[5], line_no), parse_int(tok[6], line_no)});
    } else if (kw == "row") {
      if (tok.size() < 3 || tok[0].size() != 1) throw ParseError("malformed row line", line_no);
      Sense sense;
      try {
        sense = parse_sense_code(tok[0][0]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line_no);
      }
      const double rhs = parse_double(tok[1], line_no);
      const int count = parse_int(tok[2], line_no);
      if (static_cast<int>(tok.size()) != 3 + count) {
        throw ParseError("row term count mismatch", line_no);
      }
      std::vector<std::pair<int, double>> terms;
      for (int k = 0; k < count; ++k) {
        const auto& t = tok[3 + k];
        const auto colon = t.find(':');
        if (colon == std::string::npos) throw ParseError("term must be index:coef", line_no);
        terms.emplace_back(parse_int(t.substr(0, colon), line_no),
                           parse_double(t.substr(colon + 1), line_no));
      }
      model.lp.add_row(SparseRow(std::move(terms)), sense, rhs);
    } else if (kw == "end") {
      done = true;
    } else {
      throw ParseError("unknown keyword '" + kw + "'", line_no);
    }
  }
  if (!done) throw ParseError("missing 'end'", line_no);
  if (model.lp.num_vars != expected_vars || model.lp.num_rows() != expected_rows) {
    throw ParseError("header dimensions disagree with body", line_no);
  }
  try {
    model.validate();
  } catch (const StructuralError& e) {
    throw ParseError(e.what(), line_no);
  }
  return model;
}

}  // namespace tulip
