// SPDX-License-Identifier: Apache-2.0

#include "tulip/bench.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tulip::bench {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double parse_num(const std::string& tok) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  if (tok == "nan") return std::nan("");
  return text::to_double(tok, 0);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

template <class F>
auto with_file_context(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string beta_param(const ssfp::DistanceWeights& beta) {
  return num(beta.cost) + ":" + num(beta.terminals) + ":" + num(beta.types);
}

}  // namespace

const char* kind_name(Kind kind) { return kind == Kind::scvrp ? "scvrp" : "ssfp"; }

Kind parse_kind(const std::string& text) {
  if (text == "scvrp") return Kind::scvrp;
  if (text == "ssfp") return Kind::ssfp;
  throw std::invalid_argument("unknown instance kind '" + text + "'");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::direct: return "direct";
    case Method::tulip: return "tulip";
    case Method::flow_direct: return "flow_direct";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  if (text == "direct") return Method::direct;
  if (text == "tulip") return Method::tulip;
  if (text == "flow_direct") return Method::flow_direct;
  throw std::invalid_argument("unknown method '" + text + "'");
}

int LoadedInstance::num_vertices() const {
  return kind == Kind::scvrp ? routing->num_nodes() : forest->num_vertices;
}

int LoadedInstance::num_scenarios() const {
  return kind == Kind::scvrp ? routing->num_scenarios() : forest->num_scenarios();
}

LoadedInstance load_instance(const std::string& path) {
  auto in = open_file(path);
  std::string first;
  in >> first;
  in.clear();
  in.seekg(0);
  LoadedInstance out;
  out.id = stem(path);
  with_file_context(path, [&] {
    if (first == "SSFP") {
      out.kind = Kind::ssfp;
      out.forest = ssfp::read_ssfp(in);
    } else {
      out.kind = Kind::scvrp;
      out.routing = scvrp::read_scvrp(in);
    }
    return 0;
  });
  return out;
}

LoadedInstance generate_instance(Kind kind, const std::string& base_path, double alpha,
                                 int num_scenarios, std::uint64_t seed) {
  if (num_scenarios < 1) throw std::invalid_argument("number of scenarios must be positive");
  auto in = open_file(base_path);
  LoadedInstance out;
  out.kind = kind;
  out.id = stem(base_path);
  if (kind == Kind::scvrp) {
    const auto base = with_file_context(base_path, [&] { return scvrp::parse_tsplib_vrp(in); });
    out.routing = scvrp::generate_demands(base, alpha, num_scenarios, seed);
  } else {
    auto stp = with_file_context(base_path, [&] { return ssfp::parse_stp(in); });
    if (stp.scenarios.size() == 0) {
      stp = ssfp::add_random_scenarios(stp, num_scenarios, seed);
    } else if (stp.scenarios.size() != num_scenarios) {
      throw std::invalid_argument(base_path + " defines " + std::to_string(stp.scenarios.size()) +
                                  " scenarios, not " + std::to_string(num_scenarios));
    }
    out.forest = ssfp::adapt_sstp_instance(stp, seed);
  }
  return out;
}

void write_instance(std::ostream& out, const LoadedInstance& inst) {
  if (inst.kind == Kind::scvrp) {
    scvrp::write_scvrp(out, *inst.routing);
  } else {
    ssfp::write_ssfp(out, *inst.forest);
  }
}

SolveReport solve_instance(const LoadedInstance& inst, Method method, const RunOptions& options) {
  BncOptions bnc;
  bnc.time_limit = options.time_limit;
  if (inst.kind == Kind::scvrp) {
    if (method == Method::flow_direct) throw std::invalid_argument("flow_direct is only defined for ssfp");
    const auto problem = scvrp::make_problem(*inst.routing);
    return method == Method::tulip ? tulip_solve(problem, options.fraction, bnc)
                                   : solve_direct(problem, bnc);
  }
  const auto problem = ssfp::make_problem(*inst.forest, options.beta, method == Method::flow_direct);
  return method == Method::tulip ? tulip_solve(problem, options.fraction, bnc)
                                 : solve_direct(problem, bnc);
}

RunRecord make_record(const LoadedInstance& inst, Method method, const RunOptions& options,
                      const SolveReport& report) {
  RunRecord r;
  r.instance = inst.id;
  r.kind = inst.kind;
  r.method = method;
  r.scenarios = inst.num_scenarios();
  r.vertices = inst.num_vertices();
  if (inst.kind == Kind::ssfp) r.param = beta_param(options.beta);
  r.status = status_name(report.status);
  r.objective = report.objective;
  r.bound = report.bound;
  r.gap_pct = 100.0 * report.gap;
  r.wall_time = report.wall_time.total();
  r.nodes = report.nodes;
  r.cuts = report.cuts_added;
  r.cuts_transferred = report.cuts_transferred;
  r.tight_ratio = report.tight_ratio;
  return r;
}

std::string csv_header() {
  return "instance,kind,method,vertices,scenarios,param,seed,status,objective,bound,gap_pct,"
         "wall_time,nodes,cuts_subtour,cuts_capacity,cuts_connectivity,cuts_transferred,tight_ratio";
}

std::string format_record(const RunRecord& r, bool with_timing) {
  std::ostringstream out;
  out << r.instance << ',' << kind_name(r.kind) << ',' << method_name(r.method) << ',' << r.vertices
      << ',' << r.scenarios << ',' << r.param << ',' << r.seed << ',' << r.status << ','
      << num(r.objective) << ',' << num(r.bound) << ',' << num(r.gap_pct) << ','
      << (with_timing ? num(r.wall_time) : std::string("-")) << ',' << r.nodes << ',' << r.cuts[0]
      << ',' << r.cuts[1] << ',' << r.cuts[2] << ',' << r.cuts_transferred << ','
      << num(r.tight_ratio);
  return out.str();
}

RunRecord parse_record(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 18) throw std::invalid_argument("CSV row has " + std::to_string(f.size()) + " fields");
  RunRecord r;
  r.instance = f[0];
  r.kind = parse_kind(f[1]);
  r.method = parse_method(f[2]);
  r.vertices = std::stoi(f[3]);
  r.scenarios = std::stoi(f[4]);
  r.param = f[5];
  r.seed = std::stoull(f[6]);
  r.status = f[7];
  r.objective = parse_num(f[8]);
  r.bound = parse_num(f[9]);
  r.gap_pct = parse_num(f[10]);
  r.wall_time = f[11] == "-" ? 0.0 : parse_num(f[11]);
  r.nodes = std::stol(f[12]);
  for (std::size_t i = 0; i < kNumCutOrigins; ++i) r.cuts[i] = std::stol(f[13 + i]);
  r.cuts_transferred = std::stol(f[16]);
  r.tight_ratio = parse_num(f[17]);
  return r;
}

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& base_dir) {
  std::vector<ManifestEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = text::tokens(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    ManifestEntry e;
    bool have_instance = false;
    for (const auto& tok : toks) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value, got '" + tok + "'", line_no);
      const std::string key = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      try {
        if (key == "instance") {
          std::filesystem::path p(value);
          if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
          e.instance = p.string();
          have_instance = true;
        } else if (key == "methods") {
          e.methods.clear();
          for (const auto& m : split(value, ',')) e.methods.push_back(parse_method(m));
        } else if (key == "seeds") {
          e.seeds.clear();
          for (const auto& s : split(value, ',')) e.seeds.push_back(std::stoull(s));
        } else if (key == "time_limit") {
          e.time_limit = text::to_double(value, line_no);
        } else if (key == "fraction") {
          e.fraction = text::to_double(value, line_no);
        } else if (key == "alpha") {
          e.alpha = text::to_double(value, line_no);
        } else if (key == "scenarios") {
          e.scenarios = text::to_int(value, line_no);
        } else if (key == "kind") {
          e.kind = parse_kind(value);
        } else if (key == "beta") {
          const auto b = split(value, ',');
          if (b.size() != 3) throw ParseError("beta needs three weights", line_no);
          e.beta = {text::to_double(b[0], line_no), text::to_double(b[1], line_no),
                    text::to_double(b[2], line_no)};
          ssfp::validate_weights(e.beta);
        } else {
          throw ParseError("unknown key '" + key + "'", line_no);
        }
      } catch (const std::invalid_argument& ex) {
        throw ParseError(ex.what(), line_no);
      } catch (const std::out_of_range& ex) {
        throw ParseError(ex.what(), line_no);
      }
    }
    if (!have_instance) throw ParseError("entry without instance=", line_no);
    if (e.methods.empty() || e.seeds.empty()) throw ParseError("empty methods or seeds", line_no);
    if (e.scenarios.has_value() != e.kind.has_value()) {
      throw ParseError("generated entries need both kind= and scenarios=", line_no);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string size_group(int num_vertices) {
  if (num_vertices < 50) return "small";
  if (num_vertices < 100) return "medium";
  return "large";
}

std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records) {
  static const std::vector<std::string> kOrder = {"small", "medium", "large"};
  std::map<std::pair<int, int>, Aggregate> cells;
  std::map<std::pair<int, int>, double> gap_sum;
  for (const auto& r : records) {
    const std::string g = size_group(r.vertices);
    const int gi = static_cast<int>(std::find(kOrder.begin(), kOrder.end(), g) - kOrder.begin());
    const std::pair<int, int> key{gi, static_cast<int>(r.method)};
    auto& a = cells[key];
    a.group = g;
    a.method = r.method;
    ++a.runs;
    a.mean_time += r.wall_time;
    if (std::isfinite(r.gap_pct)) {
      ++a.finite_gaps;
      gap_sum[key] += r.gap_pct;
    }
    if (r.status == "optimal") ++a.optima;
  }
  std::vector<Aggregate> out;
  for (auto& [key, a] : cells) {
    a.mean_time /= a.runs;
    a.mean_gap_pct = a.finite_gaps > 0 ? gap_sum[key] / a.finite_gaps : std::nan("");
    out.push_back(a);
  }
  return out;
}

std::string aggregate_header() { return "group,method,runs,mean_time,mean_gap_pct,finite_gaps,optima"; }

std::string format_aggregate(const Aggregate& a, bool with_timing) {
  std::ostringstream out;
  out << a.group << ',' << method_name(a.method) << ',' << a.runs << ','
      << (with_timing ? num(a.mean_time) : std::string("-")) << ',' << num(a.mean_gap_pct) << ','
      << a.finite_gaps << ',' << a.optima;
  return out.str();
}

std::vector<RunRecord> run_bench(const std::vector<ManifestEntry>& entries, int jobs,
                                 std::ostream& out, bool with_timing) {
  struct Cell {
    const ManifestEntry* entry;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Cell> cells;
  for (const auto& e : entries) {
    for (auto seed : e.seeds) {
      for (auto m : e.methods) cells.push_back({&e, seed, m});
    }
  }
  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      RunOptions opt{c.entry->time_limit, c.entry->fraction, c.entry->beta};
      RunRecord r;
      r.instance = stem(c.entry->instance);
      r.method = c.method;
      try {
        const LoadedInstance inst =
            c.entry->scenarios
                ? generate_instance(*c.entry->kind, c.entry->instance, c.entry->alpha.value_or(0.25),
                                    *c.entry->scenarios, c.seed)
                : load_instance(c.entry->instance);
        r.kind = inst.kind;
        r.scenarios = inst.num_scenarios();
        r.vertices = inst.num_vertices();
        r = make_record(inst, c.method, opt, solve_instance(inst, c.method, opt));
        if (inst.kind == Kind::scvrp && c.entry->alpha) r.param = num(*c.entry->alpha);
      } catch (const std::exception&) {
        r.status = "error";
      }
      r.seed = c.seed;
      records[i] = std::move(r);
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  out << csv_header() << "\n";
  std::vector<RunRecord> written;
  for (const auto& r : records) {
    const std::string line = format_record(r, with_timing);
    out << line << "\n";
    written.push_back(parse_record(line));
  }
  out << "\n" << aggregate_header() << "\n";
  for (const auto& a : aggregate(written)) out << format_aggregate(a, with_timing) << "\n";
  return written;
}

std::string curve_header() { return "size,fast_forward,random_min,random_mean,random_max"; }

void write_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << curve_header() << "\n";
  for (const auto& p : curve) {
    out << p.size << ',' << num(p.fast_forward) << ',' << num(p.random_min) << ','
        << num(p.random_mean) << ',' << num(p.random_max) << "\n";
  }
}

}  // namespace tulip::bench
