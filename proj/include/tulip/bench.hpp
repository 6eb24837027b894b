// SPDX-License-Identifier: Apache-2.0
//
// Batch experiments: instance loading and generation, one CSV row per solve,
// per-group aggregates and convergence tables.

#pragma once

#include "tulip/scvrp.hpp"
#include "tulip/ssfp.hpp"
#include "tulip/tulip_driver.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tulip::bench {

enum class Kind { scvrp, ssfp };
enum class Method { direct, tulip, flow_direct };

const char* kind_name(Kind kind);
Kind parse_kind(const std::string& text);
const char* method_name(Method method);
Method parse_method(const std::string& text);

struct LoadedInstance {
  Kind kind = Kind::scvrp;
  std::string id;
  std::optional<scvrp::Instance> routing;
  std::optional<ssfp::Instance> forest;

  int num_vertices() const;
  int num_scenarios() const;
};

/// Reads a stochastic instance file; the kind is taken from the content.
LoadedInstance load_instance(const std::string& path);

/// Stochastic instance from a deterministic base file (TSPLIB for routing,
/// SteinLib for forests), fully determined by the arguments.
LoadedInstance generate_instance(Kind kind, const std::string& base_path, double alpha,
                                 int num_scenarios, std::uint64_t seed);
void write_instance(std::ostream& out, const LoadedInstance& inst);

struct RunOptions {
  double time_limit = 120.0;
  double fraction = 0.1;
  ssfp::DistanceWeights beta;
};

struct RunRecord {
  std::string instance;
  Kind kind = Kind::scvrp;
  Method method = Method::direct;
  int scenarios = 0;
  int vertices = 0;
  std::string param = "-";
  std::uint64_t seed = 0;
  /// optimal, time_limit, infeasible or error.
  std::string status = "error";
  double objective = kInf;
  double bound = -kInf;
  /// Percent; infinity when there is no incumbent.
  double gap_pct = kInf;
  double wall_time = 0.0;
  long nodes = 0;
  std::array<long, kNumCutOrigins> cuts{};
  long cuts_transferred = 0;
  double tight_ratio = 1.0;
};

/// Structural errors (wrong method for the kind) propagate as exceptions.
SolveReport solve_instance(const LoadedInstance& inst, Method method, const RunOptions& options);
RunRecord make_record(const LoadedInstance& inst, Method method, const RunOptions& options,
                      const SolveReport& report);

std::string csv_header();
/// Six significant digits; wall time is written as "-" when `with_timing` is false.
std::string format_record(const RunRecord& record, bool with_timing);
/// Parses a row written by format_record.
RunRecord parse_record(const std::string& line);

struct ManifestEntry {
  std::string instance;
  std::vector<Method> methods{Method::direct, Method::tulip};
  std::vector<std::uint64_t> seeds{0};
  double time_limit = 120.0;
  double fraction = 0.1;
  ssfp::DistanceWeights beta;
  /// Set for entries that generate an instance per seed from a base file.
  std::optional<double> alpha;
  std::optional<int> scenarios;
  std::optional<Kind> kind;
};

/// One entry per non-comment line of key=value tokens (see docs/formats.md).
/// Relative instance paths are resolved against `base_dir`.
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& base_dir = "");

struct Aggregate {
  std::string group;
  Method method = Method::direct;
  int runs = 0;
  double mean_time = 0.0;
  /// Mean over finite gaps; NaN when there is none.
  double mean_gap_pct = 0.0;
  int finite_gaps = 0;
  int optima = 0;
};

/// Size class of an instance by vertex count: small (< 50), medium (< 100), large.
std::string size_group(int num_vertices);
std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records);
std::string aggregate_header();
std::string format_aggregate(const Aggregate& agg, bool with_timing);

/// Runs every (entry, seed, method) cell on `jobs` worker threads and writes
/// the rows in manifest order, a blank line and the aggregate block. Failing
/// cells become rows with status "error".
std::vector<RunRecord> run_bench(const std::vector<ManifestEntry>& entries, int jobs,
                                 std::ostream& out, bool with_timing);

std::string curve_header();
void write_curve(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace tulip::bench
