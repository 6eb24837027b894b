// SPDX-License-Identifier: Apache-2.0

#include "tulip/ssfp.hpp"

#include "tulip/branch_and_cut.hpp"
#include "tulip/tulip_driver.hpp"

#include "oracles/ssfp_oracle.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

using namespace tulip;
using namespace tulip::ssfp;

namespace {

const DistanceWeights kCostOnly{};

/// Column of the variable with `role` inside stage block `stage`.
int column_of(const MilpModel& m, int stage, int role) {
  for (int j = 0; j < m.num_vars(); ++j) {
    if (m.var_meta[j].stage == stage && m.var_meta[j].role == role) return j;
  }
  return -1;
}

/// Path 0 - 1 - 2 with one connection type and a single group {0, 2}.
Instance path_instance() {
  Instance inst;
  inst.name = "path";
  inst.num_vertices = 3;
  inst.num_types = 1;
  inst.edges = {{0, 1}, {1, 2}};
  Eigen::MatrixXd cost(1, 2);
  cost << 2.0, 3.0;
  inst.first_stage = {{{0, 2}}, {0}, cost};
  return inst;
}

const char* kSmallStp =
    "33D32945 STP File, STP Format Version 1.0\n"
    "SECTION Comment\nName \"small\"\nEND\n"
    "SECTION Graph\nNodes 3\nEdges 2\nE 1 2 7\nE 2 3 4.5\nEND\n"
    "SECTION Terminals\nTerminals 2\nT 1\nT 3\nEND\n"
    "SECTION Scenarios\nScenarios 2\nS 0.5\nG 1 3\nS 0.5\nG 1 2\nG 3 2\nEND\n"
    "EOF\n";

StpInstance grid_stp(int width, int height, int scenarios) {
  StpInstance stp;
  stp.name = "grid";
  stp.num_vertices = width * height;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int v = r * width + c;
      if (c + 1 < width) {
        stp.edges.push_back({v, v + 1});
        stp.costs.push_back(1.0 + (v % 3));
      }
      if (r + 1 < height) {
        stp.edges.push_back({v, v + width});
        stp.costs.push_back(2.0 + (v % 2));
      }
    }
  }
  stp.terminals = {0, stp.num_vertices - 1};
  for (int s = 0; s < scenarios; ++s) {
    stp.scenarios.probabilities.push_back(1.0 / scenarios);
    stp.scenarios.payload.push_back({{0, s + 1}});
  }
  return stp;
}

}  // namespace

TEST(SsfpToy, DeterministicRestrictionCostsOneAndAHalf) {
  const Instance toy = toy_instance(0.4);
  const Instance det = deterministic_restriction(toy);
  const auto cut = solve_bnc(build_ssfp_cut_model(det));
  const auto flow = solve_bnc(build_ssfp_flow_model(det));
  ASSERT_EQ(cut.status, SolveStatus::optimal);
  ASSERT_EQ(flow.status, SolveStatus::optimal);
  EXPECT_NEAR(cut.objective, 1.5, 1e-9);
  EXPECT_NEAR(flow.objective, 1.5, 1e-9);
  const MilpModel m = build_ssfp_cut_model(det);
  EXPECT_NEAR(cut.solution[install_column(det, m, 0, 0, 1)], 1.0, 1e-9);
}

TEST(SsfpToy, StochasticOptimumBeatsDeterministicStrategy) {
  const auto start = std::chrono::steady_clock::now();
  const Instance toy = toy_instance(0.4);
  const auto oracle_opt = oracle::brute_force_ssfp(toy);
  EXPECT_NEAR(oracle_opt.objective, 4.6, 1e-9);
  const auto cut = solve_bnc(build_ssfp_cut_model(toy));
  const auto flow = solve_bnc(build_ssfp_flow_model(toy));
  EXPECT_NEAR(cut.objective, 4.6, 1e-9);
  EXPECT_NEAR(flow.objective, 4.6, 1e-9);

  const MilpModel m = build_ssfp_cut_model(toy);
  EXPECT_NEAR(cut.solution[install_column(toy, m, 0, 1, 0)], 1.0, 1e-9);
  EXPECT_NEAR(cut.solution[install_column(toy, m, 0, 0, 3)], 1.0, 1e-9);
  EXPECT_NEAR(cut.solution[install_column(toy, m, 2, 1, 2)], 1.0, 1e-9);

  const std::uint64_t det_mask = std::uint64_t{1} << 1;
  EXPECT_NEAR(oracle::brute_force_ssfp(toy, &det_mask).objective, 4.7, 1e-9);
  const std::vector<std::pair<int, double>> det_first = {{0, 0}, {1, 1}, {2, 0}, {3, 0},
                                                         {4, 0}, {5, 0}, {6, 0}, {7, 0}};
  const auto fixed = fix_first_stage_and_resolve(make_problem(toy, kCostOnly), det_first);
  EXPECT_NEAR(fixed.objective, 4.7, 1e-9);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(SsfpToy, AllZeroFirstStagePaysSecondStagePrices) {
  Instance toy = toy_instance(0.4);
  toy.first_stage.groups.clear();
  const std::uint64_t none = 0;
  const double expected = oracle::brute_force_ssfp(toy, &none).objective;
  EXPECT_NEAR(expected, 0.6 * 2.0 * 1.5 + 0.4 * 8.0, 1e-9);
  std::vector<std::pair<int, double>> zeros;
  for (int role = 0; role < 8; ++role) zeros.emplace_back(role, 0.0);
  const auto r = fix_first_stage_and_resolve(make_problem(toy, kCostOnly), zeros);
  EXPECT_NEAR(r.objective, expected, 1e-9);
}

TEST(SsfpModel, SingletonGroupCostsNothing) {
  Instance inst = path_instance();
  inst.first_stage.groups = {{1}};
  for (const auto& m : {build_ssfp_cut_model(inst), build_ssfp_flow_model(inst)}) {
    const auto r = solve_bnc(m);
    EXPECT_NEAR(r.objective, 0.0, 1e-12);
    EXPECT_NEAR(r.solution.head(2).sum(), 0.0, 1e-12);
  }
}

TEST(SsfpModel, SingleEdgeGroupBuysThatEdge) {
  Instance inst = path_instance();
  inst.first_stage.groups = {{1, 2}};
  const auto r = solve_bnc(build_ssfp_flow_model(inst));
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
  EXPECT_NEAR(solve_bnc(build_ssfp_cut_model(inst)).objective, 3.0, 1e-9);
}

TEST(SsfpModel, CutAndFlowModelsAgreeWithEnumeration) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 12; ++t) {
    const int nv = 4 + t % 3;
    const Instance inst = oracle::random_ssfp(rng, nv, 1 + t % 3, 6);
    const double expected = oracle::brute_force_ssfp(inst).objective;
    const auto cut = solve_bnc(build_ssfp_cut_model(inst));
    ASSERT_EQ(cut.status, SolveStatus::optimal) << "instance " << t;
    EXPECT_NEAR(cut.objective, expected, 1e-6) << "instance " << t;
    EXPECT_GE(cut.objective, -1e-9);
    if (t % 2 == 0) {
      const auto flow = solve_bnc(build_ssfp_flow_model(inst));
      EXPECT_NEAR(flow.objective, expected, 1e-6) << "instance " << t;
    }
  }
}

TEST(SsfpModel, StageCostsAddUpToObjective) {
  const Instance toy = toy_instance(0.4);
  const MilpModel m = build_ssfp_cut_model(toy);
  const auto r = solve_bnc(m);
  const auto costs = stage_costs(toy, m, r.solution);
  ASSERT_EQ(costs.size(), 3u);
  EXPECT_NEAR(costs[0] + 0.6 * costs[1] + 0.4 * costs[2], r.objective, 1e-9);
  EXPECT_NEAR(costs[0], 3.0, 1e-9);
  EXPECT_NEAR(costs[2], 4.0, 1e-9);
}

TEST(ConnectivitySeparation, NoRequirementNoCuts) {
  const Instance inst = path_instance();
  const MilpModel m = build_ssfp_cut_model(inst);
  ASSERT_EQ(m.separators.size(), 1u);
  const Eigen::VectorXd p = Eigen::VectorXd::Zero(m.num_vars());
  EXPECT_TRUE(m.separators[0]->separate(m, p, false).empty());
}

TEST(ConnectivitySeparation, EmptySupportCutsAroundRoot) {
  const Instance inst = path_instance();
  const MilpModel m = build_ssfp_cut_model(inst);
  // Roles: x (2), y (4 arcs), y_k (4 arcs), z.
  Eigen::VectorXd p = Eigen::VectorXd::Zero(m.num_vars());
  p[column_of(m, 0, 10)] = 1.0;
  const auto cuts = m.separators[0]->separate(m, p, false);
  ASSERT_EQ(cuts.size(), 2u);
  EXPECT_EQ(cuts[0].aux, std::vector<int>{0});
  EXPECT_EQ(cuts[1].aux, (std::vector<int>{0, 1}));
  for (const auto& c : cuts) {
    EXPECT_EQ(c.origin, CutOrigin::connectivity);
    EXPECT_NEAR(cut_violation(c, p), 1.0, 1e-12);
  }
  EXPECT_EQ(cuts[0].row.size(), 2u);
}

TEST(ConnectivitySeparation, SaturatedPathIsAccepted) {
  const Instance inst = path_instance();
  const MilpModel m = build_ssfp_cut_model(inst);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(m.num_vars());
  p[column_of(m, 0, 10)] = 1.0;
  p[column_of(m, 0, 6)] = 1.0;
  p[column_of(m, 0, 8)] = 1.0;
  EXPECT_TRUE(m.separators[0]->separate(m, p, true).empty());
}

TEST(ConnectivitySeparation, CutsAreValidForEnumeratedOptima) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 6; ++t) {
    const Instance inst = oracle::random_ssfp(rng, 5, 2, 6);
    const MilpModel m = build_ssfp_cut_model(inst);
    const RootResult root = solve_root(m);
    const auto r = solve_bnc(m);
    ASSERT_TRUE(r.has_incumbent());
    for (const auto& c : root.pool.cuts()) EXPECT_GE(cut_slack(c, r.solution), -1e-9);
  }
}

TEST(SsfpDistance, Components) {
  Instance toy = toy_instance(0.4);
  EXPECT_DOUBLE_EQ(ssfp_distance(toy, 1, 1, {0.2, 0.3, 0.5}), 0.0);
  StageData a{{{1, 2}}, {0}, {}};
  StageData b{{{2, 3}}, {0, 1}, {}};
  EXPECT_DOUBLE_EQ(type_distance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(terminal_distance(a, b), 2.0);
  EXPECT_DOUBLE_EQ(ssfp_distance(toy, 0, 1, {0.0, 0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(ssfp_distance(toy, 0, 1, {0.0, 1.0, 0.0}), 2.0);
  EXPECT_DOUBLE_EQ(ssfp_distance(toy, 0, 1, kCostOnly), 0.0);
  toy.scenarios.payload[1].cost(0, 0) += 3.0;
  toy.scenarios.payload[1].cost(1, 2) += 4.0;
  EXPECT_DOUBLE_EQ(ssfp_distance(toy, 0, 1, kCostOnly), 5.0);
  EXPECT_DOUBLE_EQ(ssfp_distance(toy, 1, 0, kCostOnly), 5.0);
  EXPECT_THROW(ssfp_distance(toy, 0, 1, {0.5, 0.4, 0.0}), std::invalid_argument);
}

TEST(ParseStp, SmallGraphWithScenarios) {
  const StpInstance stp = parse_stp_text(kSmallStp);
  EXPECT_EQ(stp.name, "small");
  EXPECT_EQ(stp.num_vertices, 3);
  ASSERT_EQ(stp.edges.size(), 2u);
  EXPECT_EQ(stp.edges[0], (std::array<int, 2>{0, 1}));
  EXPECT_DOUBLE_EQ(stp.costs[0], 7.0);
  EXPECT_DOUBLE_EQ(stp.costs[1], 4.5);
  EXPECT_EQ(stp.terminals, (std::vector<int>{0, 2}));
  ASSERT_EQ(stp.scenarios.size(), 2);
  EXPECT_DOUBLE_EQ(stp.scenarios.probabilities[0] + stp.scenarios.probabilities[1], 1.0);
  EXPECT_EQ(stp.scenarios.payload[1], (std::vector<std::vector<int>>{{0, 1}, {1, 2}}));

  std::stringstream ss;
  write_stp(ss, stp);
  const StpInstance back = parse_stp(ss);
  EXPECT_EQ(back.edges, stp.edges);
  EXPECT_EQ(back.costs, stp.costs);
  EXPECT_EQ(back.scenarios.payload, stp.scenarios.payload);
}

TEST(ParseStp, ReportsLineOfError) {
  try {
    parse_stp_text("33D32945 STP File\nSECTION Graph\nNodes 3\nE 1 4 2\nEND\nEOF\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  EXPECT_THROW(parse_stp_text("x\nSECTION Graph\nNodes 3\nEND\nSECTION Scenarios\nS 0.5\nEND\nEOF\n"),
               ParseError);
}

TEST(AdaptSstp, TypeSetsAreEquallyLikely) {
  const StpInstance stp = grid_stp(3, 2, 1);
  std::map<std::vector<int>, int> counts;
  const int draws = 30000;
  for (int seed = 0; seed < draws; ++seed) {
    const Instance inst = adapt_sstp_instance(stp, static_cast<std::uint64_t>(seed));
    ++counts[inst.scenarios.payload[0].types];
  }
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [types, n] : counts) EXPECT_NEAR(n / static_cast<double>(draws), 1.0 / 3.0, 0.01);
}

TEST(AdaptSstp, PricesAndGroups) {
  const StpInstance stp = grid_stp(4, 3, 3);
  const Instance inst = adapt_sstp_instance(stp, 7);
  ASSERT_EQ(inst.num_types, 2);
  ASSERT_EQ(inst.num_scenarios(), 3);
  for (int e = 0; e < inst.num_edges(); ++e) {
    EXPECT_DOUBLE_EQ(inst.first_stage.cost(0, e), stp.costs[e]);
    EXPECT_DOUBLE_EQ(inst.first_stage.cost(1, e), 2.0 * stp.costs[e]);
    for (const auto& data : inst.scenarios.payload) {
      EXPECT_DOUBLE_EQ(data.cost(1, e), 4.0 * inst.first_stage.cost(0, e));
    }
  }
  for (int s = 0; s < 3; ++s) {
    const auto& groups = inst.scenarios.payload[s].groups;
    ASSERT_EQ(groups.size(), 3u);
    EXPECT_EQ(groups[0], stp.scenarios.payload[s][0]);
    EXPECT_EQ(groups[1].size(), 5u);
    EXPECT_EQ(groups[2].size(), 5u);
  }
  EXPECT_EQ(inst.first_stage.groups, inst.scenarios.payload[0].groups);
  EXPECT_EQ(inst.first_stage.types, (std::vector<int>{0, 1}));
  EXPECT_THROW(adapt_sstp_instance(grid_stp(2, 2, 1), 1), std::invalid_argument);
}

TEST(AdaptSstp, ThirtyVertexFileAdapts) {
  std::ifstream in(std::string(TULIP_DATA_DIR) + "/grid30.stp");
  ASSERT_TRUE(in);
  const StpInstance stp = parse_stp(in);
  EXPECT_GE(stp.num_vertices, 22);
  EXPECT_LE(stp.num_vertices, 45);
  const Instance inst = adapt_sstp_instance(stp, 1);
  EXPECT_EQ(inst.num_types, 2);
  EXPECT_NO_THROW(inst.validate());
}

TEST(SsfpFile, RoundTrips) {
  const Instance inst = adapt_sstp_instance(grid_stp(3, 3, 2), 11);
  std::stringstream ss;
  write_ssfp(ss, inst);
  const Instance back = read_ssfp(ss);
  EXPECT_EQ(back.edges, inst.edges);
  EXPECT_EQ(back.first_stage.groups, inst.first_stage.groups);
  EXPECT_EQ(back.first_stage.cost, inst.first_stage.cost);
  ASSERT_EQ(back.num_scenarios(), 2);
  for (int s = 0; s < 2; ++s) {
    EXPECT_EQ(back.scenarios.payload[s].groups, inst.scenarios.payload[s].groups);
    EXPECT_EQ(back.scenarios.payload[s].types, inst.scenarios.payload[s].types);
    EXPECT_EQ(back.scenarios.payload[s].cost, inst.scenarios.payload[s].cost);
    EXPECT_EQ(back.scenarios.probabilities[s], inst.scenarios.probabilities[s]);
  }
}

TEST(RandomScenarios, KeepHalfTheTerminals) {
  StpInstance stp = grid_stp(3, 3, 1);
  stp.scenarios = {};
  stp.terminals = {0, 2, 4, 6, 8};
  const StpInstance out = add_random_scenarios(stp, 4, 3);
  ASSERT_EQ(out.scenarios.size(), 4);
  for (const auto& groups : out.scenarios.payload) {
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].size(), 2u);
  }
  EXPECT_DOUBLE_EQ(out.scenarios.probabilities[0], 0.25);
}

TEST(FlowModel, TimeLimitInterruptsALongRootRelaxation) {
  std::ifstream in(std::string(TULIP_DATA_DIR) + "/grid30.stp");
  ASSERT_TRUE(in);
  const Instance inst = adapt_sstp_instance(parse_stp(in), 1);
  const MilpModel model = build_ssfp_flow_model(inst);
  BncOptions opt;
  opt.time_limit = 0.5;
  const auto start = std::chrono::steady_clock::now();
  const auto report = solve_bnc(model, {}, opt);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(report.status, SolveStatus::time_limit);
  EXPECT_FALSE(report.has_incumbent());
  EXPECT_LT(elapsed, 3.0);
}
