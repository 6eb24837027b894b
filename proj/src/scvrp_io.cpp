// SPDX-License-Identifier: Apache-2.0
//
// TSPLIB subset: NAME, TYPE, COMMENT, DIMENSION, CAPACITY, EDGE_WEIGHT_TYPE
// (EUC_2D | EXPLICIT), EDGE_WEIGHT_FORMAT (FULL_MATRIX | LOWER_DIAG_ROW |
// UPPER_ROW), NODE_COORD_SECTION, EDGE_WEIGHT_SECTION, DEMAND_SECTION,
// DEPOT_SECTION, plus SCENARIOS / SCENARIO_SECTION for stochastic demands.

#include "tulip/scvrp.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace tulip::scvrp {

namespace {

using text::fmt;
using text::to_double;
using text::to_int;
using text::trim;

enum class Section { none, coords, weights, demand, depot, scenarios };

struct Parsed {
  BaseInstance base;
  std::vector<double> scenario_prob;
  std::vector<std::vector<double>> scenario_demand;  // customers in file order
  int declared_scenarios = -1;
};

Parsed parse_stream(std::istream& in) {
  Parsed out;
  int dimension = -1;
  std::optional<double> capacity;
  std::string weight_type = "EUC_2D";
  std::string weight_format = "FULL_MATRIX";
  std::vector<std::array<double, 2>> coords;
  std::vector<char> have_coord;
  std::vector<double> weights;
  std::vector<double> demand;
  std::vector<char> have_demand;
  std::vector<int> depots;
  bool depot_done = false;
  Section section = Section::none;
  std::string line;
  int line_no = 0;

  auto need_dimension = [&] {
    if (dimension < 0) throw ParseError("section before DIMENSION", line_no);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const bool keyword = std::isalpha(static_cast<unsigned char>(t[0])) != 0;
    if (keyword) {
      section = Section::none;
      std::string key;
      std::string value;
      const auto colon = t.find(':');
      if (colon != std::string::npos) {
        key = trim(t.substr(0, colon));
        value = trim(t.substr(colon + 1));
      } else {
        std::istringstream ss(t);
        ss >> key;
        std::getline(ss, value);
        value = trim(value);
      }
      if (key == "EOF") break;
      if (key == "NAME") {
        out.base.name = value;
      } else if (key == "TYPE" || key == "COMMENT") {
      } else if (key == "DIMENSION") {
        dimension = to_int(value, line_no);
        if (dimension < 2) throw ParseError("DIMENSION must be at least 2", line_no);
        coords.assign(dimension, {0.0, 0.0});
        have_coord.assign(dimension, 0);
        demand.assign(dimension, 0.0);
        have_demand.assign(dimension, 0);
      } else if (key == "CAPACITY") {
        capacity = to_double(value, line_no);
      } else if (key == "EDGE_WEIGHT_TYPE") {
        if (value != "EUC_2D" && value != "EXPLICIT") {
          throw ParseError("unsupported EDGE_WEIGHT_TYPE '" + value + "'", line_no);
        }
        weight_type = value;
      } else if (key == "EDGE_WEIGHT_FORMAT") {
        if (value != "FULL_MATRIX" && value != "LOWER_DIAG_ROW" && value != "UPPER_ROW") {
          throw ParseError("unsupported EDGE_WEIGHT_FORMAT '" + value + "'", line_no);
        }
        weight_format = value;
      } else if (key == "SCENARIOS") {
        out.declared_scenarios = to_int(value, line_no);
        if (out.declared_scenarios < 1) throw ParseError("SCENARIOS must be positive", line_no);
      } else if (key == "NODE_COORD_SECTION") {
        need_dimension();
        section = Section::coords;
      } else if (key == "EDGE_WEIGHT_SECTION") {
        need_dimension();
        section = Section::weights;
      } else if (key == "DEMAND_SECTION") {
        need_dimension();
        section = Section::demand;
      } else if (key == "DEPOT_SECTION") {
        need_dimension();
        section = Section::depot;
      } else if (key == "SCENARIO_SECTION") {
        need_dimension();
        section = Section::scenarios;
      } else {
        throw ParseError("unknown keyword '" + key + "'", line_no);
      }
      continue;
    }

    std::istringstream ss(t);
    std::vector<std::string> tok;
    for (std::string s; ss >> s;) tok.push_back(s);
    switch (section) {
      case Section::none:
        throw ParseError("data outside of a section", line_no);
      case Section::coords: {
        if (tok.size() != 3) throw ParseError("coordinate line needs 'id x y'", line_no);
        const int id = to_int(tok[0], line_no) - 1;
        if (id < 0 || id >= dimension) throw ParseError("node id out of range", line_no);
        coords[id] = {to_double(tok[1], line_no), to_double(tok[2], line_no)};
        have_coord[id] = 1;
        break;
      }
      case Section::weights:
        for (const auto& s : tok) weights.push_back(to_double(s, line_no));
        break;
      case Section::demand: {
        if (tok.size() != 2) throw ParseError("demand line needs 'id demand'", line_no);
        const int id = to_int(tok[0], line_no) - 1;
        if (id < 0 || id >= dimension) throw ParseError("node id out of range", line_no);
        demand[id] = to_double(tok[1], line_no);
        if (demand[id] < 0.0) throw ParseError("negative demand", line_no);
        have_demand[id] = 1;
        break;
      }
      case Section::depot:
        for (const auto& s : tok) {
          const int id = to_int(s, line_no);
          if (id == -1) {
            depot_done = true;
          } else if (!depot_done) {
            if (id < 1 || id > dimension) throw ParseError("depot id out of range", line_no);
            depots.push_back(id - 1);
          }
        }
        break;
      case Section::scenarios: {
        if (static_cast<int>(tok.size()) != dimension) {
          throw ParseError("scenario line needs a probability and " +
                               std::to_string(dimension - 1) + " demands",
                           line_no);
        }
        out.scenario_prob.push_back(to_double(tok[0], line_no));
        std::vector<double> b;
        for (std::size_t k = 1; k < tok.size(); ++k) b.push_back(to_double(tok[k], line_no));
        out.scenario_demand.push_back(std::move(b));
        break;
      }
    }
  }

  if (dimension < 0) throw ParseError("missing DIMENSION", line_no);
  if (!capacity) throw ParseError("missing CAPACITY", line_no);
  if (std::find(have_demand.begin(), have_demand.end(), 0) != have_demand.end()) {
    throw ParseError("DEMAND_SECTION does not cover every node", line_no);
  }
  if (depots.size() != 1) throw ParseError("exactly one depot is required", line_no);

  const int n = dimension;
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  if (weight_type == "EUC_2D") {
    if (std::find(have_coord.begin(), have_coord.end(), 0) != have_coord.end()) {
      throw ParseError("NODE_COORD_SECTION does not cover every node", line_no);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double dx = coords[i][0] - coords[j][0];
        const double dy = coords[i][1] - coords[j][1];
        dist(i, j) = std::nearbyint(std::sqrt(dx * dx + dy * dy));
      }
    }
  } else {
    std::size_t expected = 0;
    if (weight_format == "FULL_MATRIX") expected = static_cast<std::size_t>(n) * n;
    else if (weight_format == "LOWER_DIAG_ROW") expected = static_cast<std::size_t>(n) * (n + 1) / 2;
    else expected = static_cast<std::size_t>(n) * (n - 1) / 2;
    if (weights.size() != expected) {
      throw ParseError("EDGE_WEIGHT_SECTION has " + std::to_string(weights.size()) +
                           " entries, expected " + std::to_string(expected),
                       line_no);
    }
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
      if (weight_format == "FULL_MATRIX") {
        for (int j = 0; j < n; ++j) dist(i, j) = weights[k++];
      } else if (weight_format == "LOWER_DIAG_ROW") {
        for (int j = 0; j <= i; ++j) dist(i, j) = dist(j, i) = weights[k++];
      } else {
        for (int j = i + 1; j < n; ++j) dist(i, j) = dist(j, i) = weights[k++];
      }
    }
  }

  // Depot first, the other nodes in file order.
  std::vector<int> order{depots[0]};
  for (int v = 0; v < n; ++v) {
    if (v != depots[0]) order.push_back(v);
  }
  out.base.dist.resize(n, n);
  out.base.demand.assign(n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) out.base.dist(a, b) = dist(order[a], order[b]);
    out.base.demand[a] = a == 0 ? 0.0 : demand[order[a]];
  }
  if (demand[depots[0]] != 0.0) throw ParseError("depot demand must be zero", line_no);
  out.base.capacity = *capacity;
  if (out.declared_scenarios >= 0 &&
      out.declared_scenarios != static_cast<int>(out.scenario_prob.size())) {
    throw ParseError("SCENARIOS count differs from SCENARIO_SECTION lines", line_no);
  }
  return out;
}

}  // namespace

BaseInstance parse_tsplib_vrp(std::istream& in) { return parse_stream(in).base; }

BaseInstance parse_tsplib_vrp_text(const std::string& text) {
  std::istringstream in(text);
  return parse_tsplib_vrp(in);
}

Instance read_scvrp(std::istream& in) {
  Parsed parsed = parse_stream(in);
  Instance inst;
  inst.name = parsed.base.name;
  inst.dist = parsed.base.dist;
  inst.capacity = parsed.base.capacity;
  if (parsed.scenario_prob.empty()) {
    inst.scenarios.probabilities = {1.0};
    inst.scenarios.payload = {parsed.base.demand};
  } else {
    inst.scenarios.probabilities = parsed.scenario_prob;
    for (auto& b : parsed.scenario_demand) {
      b.insert(b.begin(), 0.0);
      inst.scenarios.payload.push_back(std::move(b));
    }
  }
  inst.validate();
  return inst;
}

void write_scvrp(std::ostream& out, const Instance& inst) {
  const int n = inst.num_nodes();
  out << "NAME : " << inst.name << "\n";
  out << "TYPE : SCVRP\n";
  out << "DIMENSION : " << n << "\n";
  out << "CAPACITY : " << fmt(inst.capacity) << "\n";
  out << "EDGE_WEIGHT_TYPE : EXPLICIT\n";
  out << "EDGE_WEIGHT_FORMAT : FULL_MATRIX\n";
  out << "SCENARIOS : " << inst.num_scenarios() << "\n";
  out << "EDGE_WEIGHT_SECTION\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out << (j ? " " : "") << fmt(inst.dist(i, j));
    out << "\n";
  }
  out << "DEMAND_SECTION\n";
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      mean += inst.scenarios.probabilities[s] * inst.scenarios.payload[s][i];
    }
    out << i + 1 << " " << fmt(mean) << "\n";
  }
  out << "DEPOT_SECTION\n1\n-1\n";
  out << "SCENARIO_SECTION\n";
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    out << fmt(inst.scenarios.probabilities[s]);
    for (int i = 1; i < n; ++i) out << " " << fmt(inst.scenarios.payload[s][i]);
    out << "\n";
  }
  out << "EOF\n";
}

}  // namespace tulip::scvrp
