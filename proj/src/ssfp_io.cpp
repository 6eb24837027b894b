// SPDX-License-Identifier: Apache-2.0
//
// SteinLib subset (Comment, Graph, Terminals; other sections are skipped)
// with a Scenarios section, and the adapted two-stage instance format.

#include "tulip/ssfp.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace tulip::ssfp {

namespace {

using text::fmt;
using text::to_double;
using text::to_int;
using text::tokens;
using text::trim;

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

int vertex_index(const std::string& tok, int num_vertices, int line) {
  const int v = to_int(tok, line);
  if (v < 1 || v > num_vertices) throw ParseError("vertex " + tok + " out of range", line);
  return v - 1;
}

/// Draws `count` distinct vertices of 0..n-1 in ascending order.
std::vector<int> draw_distinct(std::mt19937_64& rng, int n, int count) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

StpInstance parse_stp(std::istream& in) {
  StpInstance out;
  std::string section;
  int declared_edges = -1;
  int declared_terminals = -1;
  int declared_scenarios = -1;
  bool have_nodes = false;
  bool finished = false;
  std::string line;
  int line_no = 0;
  std::set<std::array<int, 2>> seen;

  auto need_nodes = [&] {
    if (!have_nodes) throw ParseError("graph data before Nodes", line_no);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = tokens(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    const std::string key = lower(toks[0]);
    if (finished) throw ParseError("content after EOF", line_no);
    if (section.empty()) {
      if (key == "section") {
        if (toks.size() != 2) throw ParseError("SECTION needs a name", line_no);
        section = lower(toks[1]);
      } else if (key == "eof") {
        finished = true;
      } else if (line_no != 1) {
        throw ParseError("unexpected '" + toks[0] + "' outside a section", line_no);
      }
      continue;
    }
    if (key == "end") {
      if (section == "graph" && declared_edges >= 0 &&
          declared_edges != static_cast<int>(out.edges.size())) {
        throw ParseError("Edges count differs from E lines", line_no);
      }
      if (section == "terminals" && declared_terminals >= 0 &&
          declared_terminals != static_cast<int>(out.terminals.size())) {
        throw ParseError("Terminals count differs from T lines", line_no);
      }
      if (section == "scenarios" && declared_scenarios >= 0 &&
          declared_scenarios != out.scenarios.size()) {
        throw ParseError("Scenarios count differs from S lines", line_no);
      }
      section.clear();
      continue;
    }
    if (section == "comment") {
      if (key == "name") {
        std::string rest = trim(line.substr(line.find(toks[0]) + toks[0].size()));
        if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') {
          rest = rest.substr(1, rest.size() - 2);
        }
        out.name = rest;
      }
    } else if (section == "graph") {
      if (key == "nodes") {
        if (toks.size() != 2) throw ParseError("Nodes needs one value", line_no);
        out.num_vertices = to_int(toks[1], line_no);
        if (out.num_vertices < 1) throw ParseError("Nodes must be positive", line_no);
        have_nodes = true;
      } else if (key == "edges") {
        if (toks.size() != 2) throw ParseError("Edges needs one value", line_no);
        declared_edges = to_int(toks[1], line_no);
      } else if (key == "e") {
        need_nodes();
        if (toks.size() != 4) throw ParseError("E line needs two vertices and a cost", line_no);
        int u = vertex_index(toks[1], out.num_vertices, line_no);
        int v = vertex_index(toks[2], out.num_vertices, line_no);
        const double c = to_double(toks[3], line_no);
        if (u == v) throw ParseError("self-loop edge", line_no);
        if (!(c >= 0.0) || !std::isfinite(c)) throw ParseError("edge cost must be >= 0", line_no);
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) throw ParseError("duplicate edge", line_no);
        out.edges.push_back({u, v});
        out.costs.push_back(c);
      } else if (key == "arcs" || key == "a") {
        throw ParseError("directed arcs are not supported", line_no);
      } else {
        throw ParseError("unknown Graph entry '" + toks[0] + "'", line_no);
      }
    } else if (section == "terminals") {
      if (key == "terminals") {
        if (toks.size() != 2) throw ParseError("Terminals needs one value", line_no);
        declared_terminals = to_int(toks[1], line_no);
      } else if (key == "t") {
        need_nodes();
        if (toks.size() != 2) throw ParseError("T line needs one vertex", line_no);
        out.terminals.push_back(vertex_index(toks[1], out.num_vertices, line_no));
      } else if (key != "root") {
        throw ParseError("unknown Terminals entry '" + toks[0] + "'", line_no);
      }
    } else if (section == "scenarios") {
      if (key == "scenarios") {
        if (toks.size() != 2) throw ParseError("Scenarios needs one value", line_no);
        declared_scenarios = to_int(toks[1], line_no);
      } else if (key == "s") {
        if (toks.size() != 2) throw ParseError("S line needs a probability", line_no);
        const double p = to_double(toks[1], line_no);
        if (!(p > 0.0)) throw ParseError("scenario probability must be positive", line_no);
        out.scenarios.probabilities.push_back(p);
        out.scenarios.payload.emplace_back();
      } else if (key == "g") {
        need_nodes();
        if (out.scenarios.payload.empty()) throw ParseError("G line before any S line", line_no);
        if (toks.size() < 2) throw ParseError("G line needs at least one vertex", line_no);
        std::vector<int> group;
        for (std::size_t i = 1; i < toks.size(); ++i) {
          group.push_back(vertex_index(toks[i], out.num_vertices, line_no));
        }
        std::sort(group.begin(), group.end());
        group.erase(std::unique(group.begin(), group.end()), group.end());
        out.scenarios.payload.back().push_back(std::move(group));
      } else {
        throw ParseError("unknown Scenarios entry '" + toks[0] + "'", line_no);
      }
    }
  }
  if (!section.empty()) throw ParseError("section '" + section + "' not closed", line_no);
  if (!have_nodes) throw ParseError("missing Graph section", line_no);
  if (!out.scenarios.probabilities.empty()) {
    const double total = std::accumulate(out.scenarios.probabilities.begin(),
                                         out.scenarios.probabilities.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6) throw ParseError("scenario probabilities do not sum to 1", line_no);
    for (auto& p : out.scenarios.probabilities) p /= total;
  }
  return out;
}

StpInstance parse_stp_text(const std::string& text) {
  std::istringstream in(text);
  return parse_stp(in);
}

void write_stp(std::ostream& out, const StpInstance& stp) {
  out << "33D32945 STP File, STP Format Version 1.0\n\n";
  out << "SECTION Comment\nName \"" << stp.name << "\"\nEND\n\n";
  out << "SECTION Graph\nNodes " << stp.num_vertices << "\nEdges " << stp.edges.size() << "\n";
  for (std::size_t e = 0; e < stp.edges.size(); ++e) {
    out << "E " << stp.edges[e][0] + 1 << " " << stp.edges[e][1] + 1 << " " << fmt(stp.costs[e]) << "\n";
  }
  out << "END\n\n";
  out << "SECTION Terminals\nTerminals " << stp.terminals.size() << "\n";
  for (int t : stp.terminals) out << "T " << t + 1 << "\n";
  out << "END\n\n";
  if (stp.scenarios.size() > 0) {
    out << "SECTION Scenarios\nScenarios " << stp.scenarios.size() << "\n";
    for (int s = 0; s < stp.scenarios.size(); ++s) {
      out << "S " << fmt(stp.scenarios.probabilities[static_cast<std::size_t>(s)]) << "\n";
      for (const auto& g : stp.scenarios.payload[static_cast<std::size_t>(s)]) {
        out << "G";
        for (int v : g) out << " " << v + 1;
        out << "\n";
      }
    }
    out << "END\n\n";
  }
  out << "EOF\n";
}

StpInstance add_random_scenarios(const StpInstance& stp, int num_scenarios, std::uint64_t seed) {
  if (num_scenarios < 1) throw std::invalid_argument("number of scenarios must be positive");
  if (stp.terminals.size() < 2) throw std::invalid_argument("need at least two terminals");
  StpInstance out = stp;
  out.scenarios = {};
  std::mt19937_64 rng(seed);
  const int nt = static_cast<int>(stp.terminals.size());
  const int keep = std::max(2, nt / 2);
  for (int s = 0; s < num_scenarios; ++s) {
    std::vector<int> group;
    for (int i : draw_distinct(rng, nt, keep)) group.push_back(stp.terminals[static_cast<std::size_t>(i)]);
    std::sort(group.begin(), group.end());
    out.scenarios.probabilities.push_back(1.0 / num_scenarios);
    out.scenarios.payload.push_back({group});
  }
  return out;
}

Instance adapt_sstp_instance(const StpInstance& stp, std::uint64_t seed) {
  if (stp.num_vertices < 5) throw std::invalid_argument("adaptation needs at least five vertices");
  if (stp.scenarios.size() < 1) throw std::invalid_argument("adaptation needs at least one scenario");
  Instance inst;
  inst.name = stp.name;
  inst.num_vertices = stp.num_vertices;
  inst.edges = stp.edges;
  inst.num_types = 2;
  const int ne = static_cast<int>(stp.edges.size());
  Eigen::MatrixXd cost(2, ne);
  for (int e = 0; e < ne; ++e) {
    cost(0, e) = stp.costs[static_cast<std::size_t>(e)];
    cost(1, e) = 2.0 * cost(0, e);
  }
  std::mt19937_64 rng(seed);
  static const std::vector<std::vector<int>> kTypeSets = {{0}, {1}, {0, 1}};
  inst.scenarios.probabilities = stp.scenarios.probabilities;
  for (const auto& groups : stp.scenarios.payload) {
    StageData data;
    for (const auto& g : groups) {
      if (!g.empty()) data.groups.push_back(g);
    }
    for (int extra = 0; extra < 2; ++extra) data.groups.push_back(draw_distinct(rng, stp.num_vertices, 5));
    std::uniform_int_distribution<int> pick(0, 2);
    data.types = kTypeSets[static_cast<std::size_t>(pick(rng))];
    data.cost = 2.0 * cost;
    inst.scenarios.payload.push_back(std::move(data));
  }
  inst.first_stage.groups = inst.scenarios.payload.front().groups;
  inst.first_stage.types = {0, 1};
  inst.first_stage.cost = cost;
  normalize(inst);
  inst.validate();
  return inst;
}

void write_ssfp(std::ostream& out, const Instance& inst) {
  auto stage = [&](int index, double probability, const StageData& data) {
    out << "STAGE " << index << " " << fmt(probability) << "\n";
    out << "USE";
    for (int m : data.types) out << " " << m + 1;
    out << "\n";
    for (int m = 0; m < inst.num_types; ++m) {
      out << "COST " << m + 1;
      for (int e = 0; e < inst.num_edges(); ++e) out << " " << fmt(data.cost(m, e));
      out << "\n";
    }
    for (const auto& g : data.groups) {
      out << "GROUP";
      for (int v : g) out << " " << v + 1;
      out << "\n";
    }
    out << "END\n";
  };
  out << "SSFP\n";
  out << "NAME " << inst.name << "\n";
  out << "VERTICES " << inst.num_vertices << "\n";
  out << "TYPES " << inst.num_types << "\n";
  out << "EDGES " << inst.num_edges() << "\n";
  for (const auto& e : inst.edges) out << "E " << e[0] + 1 << " " << e[1] + 1 << "\n";
  out << "SCENARIOS " << inst.num_scenarios() << "\n";
  stage(0, 1.0, inst.first_stage);
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    stage(s + 1, inst.scenarios.probabilities[static_cast<std::size_t>(s)],
          inst.scenarios.payload[static_cast<std::size_t>(s)]);
  }
  out << "EOF\n";
}

Instance read_ssfp(std::istream& in) {
  Instance inst;
  std::string line;
  int line_no = 0;
  int declared_edges = -1;
  int declared_scenarios = -1;
  bool header = false;
  bool finished = false;
  bool have_first = false;
  StageData* current = nullptr;
  std::vector<char> cost_seen;

  auto want = [&](const std::vector<std::string>& toks, std::size_t n) {
    if (toks.size() != n) throw ParseError("'" + toks[0] + "' has the wrong number of fields", line_no);
  };
  auto need_graph = [&] {
    if (inst.num_vertices < 1 || inst.num_types < 1) {
      throw ParseError("VERTICES and TYPES must come first", line_no);
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = tokens(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    const std::string& key = toks[0];
    if (finished) throw ParseError("content after EOF", line_no);
    if (!header) {
      if (key != "SSFP") throw ParseError("missing SSFP header", line_no);
      header = true;
      continue;
    }
    if (current != nullptr) {
      if (key == "USE") {
        current->types.clear();
        for (std::size_t i = 1; i < toks.size(); ++i) {
          const int m = to_int(toks[i], line_no);
          if (m < 1 || m > inst.num_types) throw ParseError("connection type out of range", line_no);
          current->types.push_back(m - 1);
        }
      } else if (key == "COST") {
        want(toks, static_cast<std::size_t>(inst.num_edges()) + 2);
        const int m = to_int(toks[1], line_no);
        if (m < 1 || m > inst.num_types) throw ParseError("connection type out of range", line_no);
        for (int e = 0; e < inst.num_edges(); ++e) {
          current->cost(m - 1, e) = to_double(toks[static_cast<std::size_t>(e) + 2], line_no);
        }
        cost_seen[static_cast<std::size_t>(m - 1)] = 1;
      } else if (key == "GROUP") {
        if (toks.size() < 2) throw ParseError("GROUP needs at least one vertex", line_no);
        std::vector<int> g;
        for (std::size_t i = 1; i < toks.size(); ++i) g.push_back(vertex_index(toks[i], inst.num_vertices, line_no));
        current->groups.push_back(std::move(g));
      } else if (key == "END") {
        if (std::find(cost_seen.begin(), cost_seen.end(), 0) != cost_seen.end()) {
          throw ParseError("stage is missing a COST line", line_no);
        }
        current = nullptr;
      } else {
        throw ParseError("unknown stage entry '" + key + "'", line_no);
      }
      continue;
    }
    if (key == "NAME") {
      inst.name = trim(line.substr(line.find(key) + key.size()));
    } else if (key == "VERTICES") {
      want(toks, 2);
      inst.num_vertices = to_int(toks[1], line_no);
      if (inst.num_vertices < 1) throw ParseError("VERTICES must be positive", line_no);
    } else if (key == "TYPES") {
      want(toks, 2);
      inst.num_types = to_int(toks[1], line_no);
      if (inst.num_types < 1) throw ParseError("TYPES must be positive", line_no);
    } else if (key == "EDGES") {
      want(toks, 2);
      declared_edges = to_int(toks[1], line_no);
    } else if (key == "E") {
      need_graph();
      want(toks, 3);
      int u = vertex_index(toks[1], inst.num_vertices, line_no);
      int v = vertex_index(toks[2], inst.num_vertices, line_no);
      if (u == v) throw ParseError("self-loop edge", line_no);
      if (u > v) std::swap(u, v);
      inst.edges.push_back({u, v});
    } else if (key == "SCENARIOS") {
      want(toks, 2);
      declared_scenarios = to_int(toks[1], line_no);
      if (declared_scenarios < 0) throw ParseError("SCENARIOS must be >= 0", line_no);
    } else if (key == "STAGE") {
      need_graph();
      want(toks, 3);
      if (declared_edges != inst.num_edges()) throw ParseError("EDGES count differs from E lines", line_no);
      const int index = to_int(toks[1], line_no);
      const double p = to_double(toks[2], line_no);
      if (index == 0) {
        if (have_first) throw ParseError("first stage given twice", line_no);
        have_first = true;
        current = &inst.first_stage;
      } else {
        if (!have_first || index != inst.num_scenarios() + 1) throw ParseError("stages must be numbered consecutively", line_no);
        inst.scenarios.probabilities.push_back(p);
        inst.scenarios.payload.emplace_back();
        current = &inst.scenarios.payload.back();
      }
      current->cost = Eigen::MatrixXd::Zero(inst.num_types, inst.num_edges());
      cost_seen.assign(static_cast<std::size_t>(inst.num_types), 0);
    } else if (key == "EOF") {
      finished = true;
    } else {
      throw ParseError("unknown entry '" + key + "'", line_no);
    }
  }
  if (!header) throw ParseError("missing SSFP header", line_no);
  if (current != nullptr) throw ParseError("stage not closed", line_no);
  if (!have_first) throw ParseError("missing first stage", line_no);
  if (declared_scenarios >= 0 && declared_scenarios != inst.num_scenarios()) {
    throw ParseError("SCENARIOS count differs from STAGE blocks", line_no);
  }
  normalize(inst);
  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no);
  }
  return inst;
}

}  // namespace tulip::ssfp
