// SPDX-License-Identifier: Apache-2.0
//
// tulip generate | solve | bench | converge

#include "tulip/bench.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace tulip;

struct BetaFlags {
  double b1 = 1.0;
  double b2 = 0.0;
  double b3 = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--beta1", b1, "Weight of the cost distance")->capture_default_str();
    app->add_option("--beta2", b2, "Weight of the terminal-group distance")->capture_default_str();
    app->add_option("--beta3", b3, "Weight of the connection-type distance")->capture_default_str();
  }
  ssfp::DistanceWeights weights() const {
    ssfp::DistanceWeights w{b1, b2, b3};
    ssfp::validate_weights(w);
    return w;
  }
};

/// Writes to `path`, or to stdout when it is empty.
template <class F>
void with_output(const std::string& path, bool append, F&& f) {
  if (path.empty()) {
    f(std::cout, true);
    return;
  }
  const bool fresh = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  f(out, fresh);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warm-started branch-and-cut for two-stage stochastic programs"};
  app.require_subcommand(1);

  std::string kind = "scvrp";
  std::string base;
  std::string out_path;
  double alpha = 0.25;
  int scenarios = 0;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("generate", "Write a stochastic instance built from a base file");
  gen->add_option("--kind", kind, "scvrp or ssfp")->capture_default_str();
  gen->add_option("--base", base, "TSPLIB (scvrp) or SteinLib (ssfp) base file")->required();
  gen->add_option("--alpha", alpha, "Demand variance factor (scvrp)")->capture_default_str();
  gen->add_option("--scenarios", scenarios, "Number of scenarios")->required();
  gen->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen->add_option("--out", out_path, "Output file (stdout when omitted)");

  std::string instance;
  std::string method = "tulip";
  double time_limit = 120.0;
  double fraction = 0.1;
  BetaFlags beta;
  std::string event_log;
  auto* solve = app.add_subcommand("solve", "Solve one instance and append a CSV row");
  solve->add_option("instance", instance, "Instance file")->required();
  solve->add_option("--method", method, "direct, tulip or flow_direct")->capture_default_str();
  solve->add_option("--time-limit", time_limit, "Wall-clock limit in seconds")->capture_default_str();
  solve->add_option("--fraction", fraction, "Share of scenarios kept by the reduction")->capture_default_str();
  solve->add_option("--seed", seed, "Seed recorded in the row")->capture_default_str();
  solve->add_option("--out", out_path, "CSV file to append to (stdout when omitted)");
  beta.attach(solve);

  std::string manifest;
  int jobs = 1;
  bool deterministic = false;
  auto* bench_cmd = app.add_subcommand("bench", "Run a manifest of solves and aggregate them");
  bench_cmd->add_option("manifest", manifest, "Manifest file")->required();
  bench_cmd->add_option("--jobs", jobs, "Concurrent solves")->capture_default_str();
  bench_cmd->add_option("--out", out_path, "CSV output (stdout when omitted)");
  bench_cmd->add_flag("--deterministic", deterministic, "Write '-' instead of wall times");

  std::vector<int> sizes;
  int repeats = 25;
  auto* conv = app.add_subcommand("converge", "Fixed-first-stage objective against reduced size");
  conv->add_option("instance", instance, "Instance file")->required();
  conv->add_option("--sizes", sizes, "Reduced sizes (default 1, 2, 5, 10, S within range)");
  conv->add_option("--repeats", repeats, "Random samples per size")->capture_default_str();
  conv->add_option("--seed", seed, "Seed of the random samples")->capture_default_str();
  conv->add_option("--time-limit", time_limit, "Limit per solve in seconds")->capture_default_str();
  conv->add_option("--out", out_path, "CSV output (stdout when omitted)");
  beta.attach(conv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto inst = bench::generate_instance(bench::parse_kind(kind), base, alpha, scenarios, seed);
      with_output(out_path, false, [&](std::ostream& out, bool) { bench::write_instance(out, inst); });
    } else if (*solve) {
      const auto inst = bench::load_instance(instance);
      const auto m = bench::parse_method(method);
      if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("--fraction must lie in (0, 1]");
      const bench::RunOptions opt{time_limit, fraction, beta.weights()};
      auto record = bench::make_record(inst, m, opt, bench::solve_instance(inst, m, opt));
      record.seed = seed;
      with_output(out_path, true, [&](std::ostream& out, bool fresh) {
        if (fresh) out << bench::csv_header() << "\n";
        out << bench::format_record(record, true) << "\n";
      });
    } else if (*bench_cmd) {
      std::ifstream in(manifest);
      if (!in) throw std::runtime_error("cannot open " + manifest);
      const auto dir = std::filesystem::path(manifest).parent_path().string();
      const auto entries = bench::parse_manifest(in, dir);
      with_output(out_path, false, [&](std::ostream& out, bool) {
        bench::run_bench(entries, jobs, out, !deterministic);
      });
    } else if (*conv) {
      const auto inst = bench::load_instance(instance);
      const int s = inst.num_scenarios();
      if (sizes.empty()) {
        for (int k : {1, 2, 5, 10}) {
          if (k < s) sizes.push_back(k);
        }
        sizes.push_back(s);
      }
      const auto problem = inst.kind == bench::Kind::scvrp ? scvrp::make_problem(*inst.routing)
                                                           : ssfp::make_problem(*inst.forest, beta.weights());
      BncOptions opt;
      opt.time_limit = time_limit;
      const auto curve = convergence_curve(problem, sizes, repeats, seed, opt);
      with_output(out_path, false, [&](std::ostream& out, bool) { bench::write_curve(out, curve); });
    }
  } catch (const std::exception& e) {
    std::cerr << "tulip: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
