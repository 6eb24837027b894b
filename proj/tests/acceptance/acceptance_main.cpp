// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance run. Prints one PASS or FAIL line per criterion and
// exits nonzero when any criterion fails.

#include "fixtures.hpp"
#include "oracles/lp_oracle.hpp"
#include "oracles/random_lp.hpp"
#include "oracles/reduction_oracle.hpp"
#include "oracles/scvrp_oracle.hpp"
#include "oracles/ssfp_oracle.hpp"

#include "tulip/bench.hpp"
#include "tulip/max_flow.hpp"
#include "tulip/scenario_reduction.hpp"
#include "tulip/scvrp.hpp"
#include "tulip/ssfp.hpp"
#include "tulip/tulip_driver.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace tulip;

namespace {

const std::string kDataDir = TULIP_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

struct TightRatioLog {
  long runs = 0;
  long violations = 0;
};

/// Recomputes the warm start of a tulip run and compares its bookkeeping.
void audit_tight_ratio(const TwoStageProblem& problem, double fraction, const SolveReport& report,
                       TightRatioLog& log) {
  ++log.runs;
  const int target = reduction_fraction_to_target(problem.num_scenarios(), fraction);
  const auto reduction = fast_forward_select(distance_matrix(problem), problem.probabilities, target);
  const MilpModel reduced = problem.build_model(reduction.selected, reduction.new_probabilities);
  const RootResult root = solve_root(reduced);
  const CutPool tight = filter_tight(root.pool, root.lp.point);
  const double ratio =
      root.pool.empty() ? 1.0 : static_cast<double>(tight.size()) / static_cast<double>(root.pool.size());
  const bool ok = report.tight_ratio >= 0.0 && report.tight_ratio <= 1.0 &&
                  report.cuts_transferred == static_cast<long>(tight.size()) && report.tight_ratio == ratio;
  if (!ok) ++log.violations;
}

Outcome correctness_preservation(TightRatioLog& log) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  const int scenario_counts[] = {2, 4, 5};
  const double alphas[] = {0.05, 0.25, 0.75};
  int mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 30; ++t) {
    const auto inst =
        oracle::random_scvrp(rng, 5 + (t / 9) % 3, scenario_counts[t % 3], alphas[(t / 3) % 3]);
    const auto problem = scvrp::make_problem(inst);
    const double fraction = t % 2 == 0 ? 0.5 : 0.1;
    const auto direct = solve_direct(problem);
    const auto warm = tulip_solve(problem, fraction);
    const double diff = std::abs(direct.objective - warm.objective);
    worst = std::max(worst, diff);
    if (!(diff <= 1e-6) || direct.status != SolveStatus::optimal || warm.status != SolveStatus::optimal) {
      ++mismatches;
    }
    audit_tight_ratio(problem, fraction, warm, log);
  }
  for (int t = 0; t < 15; ++t) {
    const int nv = 5 + t % 4;
    const auto inst = oracle::random_ssfp(rng, nv, 2 + t % 3, nv + 3);
    const auto problem = ssfp::make_problem(inst, {});
    const double fraction = t % 2 == 0 ? 0.5 : 0.1;
    const auto direct = solve_direct(problem);
    const auto warm = tulip_solve(problem, fraction);
    const double diff = std::abs(direct.objective - warm.objective);
    worst = std::max(worst, diff);
    if (!(diff <= 1e-6) || direct.status != SolveStatus::optimal || warm.status != SolveStatus::optimal) {
      ++mismatches;
    }
    audit_tight_ratio(problem, fraction, warm, log);
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = mismatches == 0 && elapsed < 300.0;
  out.detail = fmt("45 instances, %.0f mismatches, max |diff| %.3g, %.1f s", mismatches, worst, elapsed);
  return out;
}

Outcome brute_force_routing() {
  std::mt19937_64 rng(77);
  const double alphas[] = {0.05, 0.25, 0.75};
  int mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto inst = oracle::random_scvrp(rng, 4 + t % 2, 1 + t % 3, alphas[t % 3]);
    const double expected = oracle::brute_force_scvrp(inst).objective;
    const auto r = solve_bnc(scvrp::build_scvrp_model(inst));
    const double diff = std::abs(r.objective - expected);
    worst = std::max(worst, diff);
    if (!(diff <= 1e-6)) ++mismatches;
  }
  Outcome out;
  out.pass = mismatches == 0;
  out.detail = fmt("20 instances, %.0f mismatches, max |diff| %.3g", mismatches, worst);
  return out;
}

Outcome forest_toy() {
  const auto start = std::chrono::steady_clock::now();
  const ssfp::Instance toy = ssfp::toy_instance(0.4);
  const ssfp::Instance det = ssfp::deterministic_restriction(toy);
  const double det_cut = solve_bnc(ssfp::build_ssfp_cut_model(det)).objective;
  const double det_flow = solve_bnc(ssfp::build_ssfp_flow_model(det)).objective;
  const double sp_cut = solve_bnc(ssfp::build_ssfp_cut_model(toy)).objective;
  const double sp_flow = solve_bnc(ssfp::build_ssfp_flow_model(toy)).objective;
  const double sp_oracle = oracle::brute_force_ssfp(toy).objective;
  const std::uint64_t det_mask = std::uint64_t{1} << 1;
  const double det_strategy = oracle::brute_force_ssfp(toy, &det_mask).objective;
  std::vector<std::pair<int, double>> det_first;
  for (int role = 0; role < 8; ++role) det_first.emplace_back(role, role == 1 ? 1.0 : 0.0);
  const double det_resolved =
      fix_first_stage_and_resolve(ssfp::make_problem(toy, {}), det_first).objective;
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = std::abs(det_cut - 1.5) <= 1e-9 && std::abs(det_flow - 1.5) <= 1e-9 &&
             std::abs(sp_cut - 4.6) <= 1e-9 && std::abs(sp_flow - 4.6) <= 1e-9 &&
             std::abs(sp_oracle - 4.6) <= 1e-9 && std::abs(det_strategy - 4.7) <= 1e-9 &&
             std::abs(det_resolved - 4.7) <= 1e-9 &&
             sp_cut < det_strategy && elapsed < 1.0;
  out.detail = fmt("restriction %.6g, stochastic %.6g vs fixed strategy %.6g", det_cut, sp_cut, det_strategy) +
               fmt(" (resolved %.6g), flow model %.6g/%.6g", det_resolved, det_flow, sp_flow) +
               fmt(", %.3f s", elapsed);
  return out;
}

/// Optimal tours of the four-city toy under `dist`, both orientations.
std::vector<std::vector<int>> optimal_orders(const scvrp::Instance& inst, double& best) {
  std::vector<int> order = {1, 2, 3, 4};
  best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> argmin;
  do {
    double cost = 0.0;
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      cost += inst.scenarios.probabilities[s] * oracle::best_split(inst, order, inst.scenarios.payload[s]);
    }
    if (cost < best - 1e-9) {
      best = cost;
      argmin.clear();
    }
    if (cost <= best + 1e-9) argmin.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return argmin;
}

Outcome routing_toy() {
  // Drawn positions of depot and cities 1..4.
  const double xy[5][2] = {{0.0, 0.25}, {-1.0, 1.0}, {-0.75, 2.0}, {0.75, 2.0}, {1.0, 1.0}};
  scvrp::Instance drawn = fixtures::four_city_toy();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) drawn.dist(i, j) = std::hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1]);
  }
  double drawn_best = 0.0;
  const auto drawn_orders = optimal_orders(drawn, drawn_best);
  bool drawn_starts_at_three = true;
  for (const auto& o : drawn_orders) drawn_starts_at_three = drawn_starts_at_three && o.front() == 3;

  const scvrp::Instance inst = fixtures::four_city_toy();
  const auto r = solve_bnc(scvrp::build_scvrp_model(inst));
  double best = 0.0;
  const auto orders = optimal_orders(inst, best);
  const auto tour = scvrp::extract_routes(inst, r.solution, 0);
  const bool unique_up_to_orientation =
      orders.size() == 2 && orders[0] == std::vector<int>{3, 2, 1, 4} && orders[1] == std::vector<int>{4, 1, 2, 3};
  const bool solver_tour = tour.size() == 1 && (tour[0] == orders.front() || tour[0] == orders.back());
  std::vector<int> breaks_low;
  std::vector<int> breaks_high;
  const std::vector<int> departs_three = {3, 2, 1, 4};
  oracle::best_split(inst, departs_three, inst.scenarios.payload[0], &breaks_low);
  oracle::best_split(inst, departs_three, inst.scenarios.payload[1], &breaks_high);
  const bool returns_only_when_high = breaks_low.size() == 1 && breaks_high.size() == 2 &&
                                      extract_routes(inst, r.solution, 1).size() == 1 &&
                                      extract_routes(inst, r.solution, 2).size() == 2;
  const bool metric_ok = std::abs(r.objective - best) <= 1e-9 && unique_up_to_orientation && solver_tour &&
                         returns_only_when_high;

  Outcome out;
  out.pass = metric_ok && drawn_starts_at_three;
  out.detail = std::string("hand-built metric: ") +
               (metric_ok ? "optimum departs to city 3 (up to orientation), depot return only in the high-demand "
                            "scenario"
                          : "route or recourse differs") +
               "; distances measured on the drawing: optimal tour departs to city " +
               std::to_string(drawn_orders.front().front()) + " or " +
               std::to_string(drawn_orders.back().front()) + fmt(" (cost %.4g)", drawn_best);
  return out;
}

Outcome scenario_reduction() {
  DistanceMatrix d(3, 3);
  d << 0, 1, 4, 1, 0, 2, 4, 2, 0;
  const std::vector<double> p = {0.5, 0.3, 0.2};
  const auto one = fast_forward_select(d, p, 1);
  const auto two = fast_forward_select(d, p, 2);
  bool examples = one.selected == std::vector<int>{1} && std::abs(one.new_probabilities[0] - 1.0) <= 1e-12 &&
                  two.selected == std::vector<int>{1, 0} && std::abs(two.new_probabilities[0] - 0.5) <= 1e-12 &&
                  std::abs(two.new_probabilities[1] - 0.5) <= 1e-12 && two.assignment.at(2) == 1;

  std::mt19937_64 rng(99);
  int bad_sums = 0;
  int oracle_mismatch = 0;
  int non_monotone = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 9)(rng);
    const auto dist = oracle::random_distances(rng, n);
    const auto prob = oracle::random_probabilities(rng, n);
    const int target = std::uniform_int_distribution<int>(1, n)(rng);
    const auto red = fast_forward_select(dist, prob, target);
    double sum = 0.0;
    for (double q : red.new_probabilities) sum += q;
    if (!(std::abs(sum - 1.0) <= 1e-12)) ++bad_sums;
    if (red.selected != oracle::greedy_selection(dist, prob, target)) ++oracle_mismatch;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n; ++k) {
      const double cost = transport_cost(dist, prob, fast_forward_select(dist, prob, k).selected);
      if (cost > previous + 1e-12) ++non_monotone;
      previous = cost;
    }
  }
  Outcome out;
  out.pass = examples && bad_sums == 0 && oracle_mismatch == 0 && non_monotone == 0;
  out.detail = std::string(examples ? "examples reproduced" : "examples differ") +
               fmt("; 1000 triples: %.0f bad sums, %.0f selection mismatches, %.0f monotonicity breaks", bad_sums,
                   oracle_mismatch, non_monotone);
  return out;
}

Outcome max_flow_duality() {
  std::mt19937_64 rng(500);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 7)(rng);
    const int m = std::uniform_int_distribution<int>(0, 3 * n)(rng);
    std::vector<FlowArc> arcs;
    for (int a = 0; a < m; ++a) {
      const int u = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const int v = std::uniform_int_distribution<int>(0, n - 1)(rng);
      arcs.push_back({u, v, static_cast<double>(std::uniform_int_distribution<int>(0, 5)(rng))});
    }
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (!(mask & 1u) || (mask >> (n - 1) & 1u)) continue;
      double c = 0.0;
      for (const auto& a : arcs) {
        if ((mask >> a.from & 1u) && !(mask >> a.to & 1u)) c += a.capacity;
      }
      best = std::min(best, c);
    }
    if (max_flow(n, arcs, 0, n - 1).value != best) ++mismatches;
  }
  Outcome out;
  out.pass = mismatches == 0;
  out.detail = fmt("500 digraphs, %.0f inexact values", mismatches);
  return out;
}

Outcome lp_engine() {
  std::mt19937_64 rng(1000);
  int wrong_status = 0;
  int wrong_value = 0;
  int optimal = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto lp = oracle::random_bounded_lp(rng);
    const auto ref = oracle::enumerate_vertices(lp);
    const auto sol = solve_lp(lp);
    const LpStatus expected = ref.feasible ? LpStatus::optimal : LpStatus::infeasible;
    if (sol.status != expected) {
      ++wrong_status;
      continue;
    }
    if (!ref.feasible) continue;
    ++optimal;
    if (!(std::abs(sol.objective - ref.objective) <= 1e-6)) ++wrong_value;
  }
  Outcome out;
  out.pass = wrong_status == 0 && wrong_value == 0;
  out.detail = fmt("1000 LPs (%.0f feasible), %.0f wrong statuses, %.0f wrong objectives", optimal, wrong_status,
                   wrong_value);
  return out;
}

Outcome tight_ratio(const TightRatioLog& log) {
  Outcome out;
  out.pass = log.runs > 0 && log.violations == 0;
  out.detail = fmt("%.0f tulip runs audited, %.0f inconsistent", log.runs, log.violations);
  return out;
}

Outcome convergence(TightRatioLog& log) {
  const auto start = std::chrono::steady_clock::now();
  const bench::LoadedInstance inst =
      bench::generate_instance(bench::Kind::scvrp, kDataDir + "/seven_city.vrp", 0.25, 20, 6);
  const auto problem = scvrp::make_problem(*inst.routing);
  const double optimum = solve_direct(problem).objective;
  const auto warm = tulip_solve(problem, 0.1);
  audit_tight_ratio(problem, 0.1, warm, log);
  const std::vector<int> sizes = {1, 2, 3, 5, 10, 15, 20};
  const auto curve = convergence_curve(problem, sizes, 25, 6);
  const auto& last = curve.back();
  const bool endpoint = last.fast_forward == optimum && last.random_min == optimum && last.random_max == optimum;
  int outside = 0;
  for (const auto& pt : curve) {
    if (pt.fast_forward < pt.random_min - 1e-9 || pt.fast_forward > pt.random_max + 1e-9) ++outside;
  }
  Outcome out;
  out.pass = endpoint && outside == 0 && std::abs(warm.objective - optimum) <= 1e-6;
  out.detail = fmt("optimum %.6g, size-20 value %.6g, %.0f sizes outside the random band", optimum,
                   last.fast_forward, outside) +
               fmt(", %.1f s", seconds_since(start));
  return out;
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "tulip_acceptance";
  std::filesystem::create_directories(dir);
  const auto stp = dir / "wheel6.stp";
  {
    std::ofstream out(stp);
    out << "33D32945 STP File, STP Format Version 1.0\n"
           "SECTION Graph\nNodes 6\nEdges 9\n"
           "E 1 2 3\nE 1 3 4\nE 1 4 2\nE 1 5 5\nE 1 6 3\nE 2 3 1\nE 3 4 2\nE 4 5 1\nE 5 6 2\nEND\n"
           "SECTION Terminals\nTerminals 2\nT 2\nT 5\nEND\n"
           "SECTION Scenarios\nScenarios 2\nS 0.6\nG 2 5\nS 0.4\nG 3 6\nEND\nEOF\n";
  }
  const std::string manifest_text =
      "instance=" + kDataDir + "/seven_city.vrp kind=scvrp scenarios=5 alpha=0.25 seeds=1,2 methods=direct,tulip\n"
      "instance=" + stp.string() + " kind=ssfp scenarios=2 seeds=3 methods=direct,tulip,flow_direct\n";
  auto run = [&](int jobs) {
    std::istringstream manifest(manifest_text);
    std::ostringstream csv;
    bench::run_bench(bench::parse_manifest(manifest), jobs, csv, false);
    return csv.str();
  };
  auto generated = [&] {
    std::ostringstream text;
    bench::write_instance(text, bench::generate_instance(bench::Kind::scvrp, kDataDir + "/seven_city.vrp", 0.75, 4, 9));
    bench::write_instance(text, bench::generate_instance(bench::Kind::ssfp, stp.string(), 0.0, 2, 9));
    return text.str();
  };
  const std::string first = run(1);
  const std::string second = run(1);
  const std::string parallel = run(3);
  const bool same_instances = generated() == generated();
  auto curve_text = [&] {
    std::ostringstream text;
    const auto inst = bench::generate_instance(bench::Kind::scvrp, kDataDir + "/seven_city.vrp", 0.5, 6, 4);
    bench::write_curve(text, convergence_curve(scvrp::make_problem(*inst.routing), std::vector<int>{1, 3, 6}, 5, 4));
    return text.str();
  };
  const bool same_curve = curve_text() == curve_text();
  Outcome out;
  out.pass = first == second && first == parallel && same_instances && same_curve && !first.empty();
  out.detail = std::string("bench CSV ") + (first == second && first == parallel ? "identical" : "differs") +
               " across repeats and job counts, generated instances " + (same_instances ? "identical" : "differ") +
               ", convergence curve " + (same_curve ? "identical" : "differs") +
               fmt(" (%.0f bytes)", static_cast<double>(first.size()));
  return out;
}

}  // namespace

int main() {
  TightRatioLog log;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"correctness preservation", [&] { return correctness_preservation(log); }},
      {"brute-force routing oracle", brute_force_routing},
      {"forest toy", forest_toy},
      {"routing toy", routing_toy},
      {"scenario reduction", scenario_reduction},
      {"max-flow duality", max_flow_duality},
      {"lp engine", lp_engine},
      {"convergence study", [&] { return convergence(log); }},
      {"tight-ratio bookkeeping", [&] { return tight_ratio(log); }},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome result;
    try {
      result = check();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    if (!result.pass) ++failures;
    std::printf("%s %s: %s\n", result.pass ? "PASS" : "FAIL", name.c_str(), result.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
