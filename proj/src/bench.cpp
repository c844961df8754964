#include "lqrcbf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace lqrcbf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void put_state(std::ostream& out, const State& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) out << ' ' << format_number(x[i]);
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

std::map<std::string, std::string> key_values(const std::vector<std::string>& tokens,
                                              std::size_t first) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos) continue;
    kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  return kv;
}

std::size_t parse_size(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("bad integer '" + std::string(text) + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("write failed: " + path.string());
}

SeedRun run_seed(const ScenarioConfig& config, std::uint64_t seed) {
  SeedRun run;
  SeedReport& rep = run.report;
  rep.seed = seed;
  rep.best_cost = kInf;
  rep.path_length = kNaN;
  try {
    double best_time = kInf;
    for (int r = 0; r < config.timing_repeats; ++r) {
      auto planner = std::make_unique<Planner>(
          make_problem(config), planner_config(config, seed),
          sampler_config(config));
      const auto t0 = std::chrono::steady_clock::now();
      PlanResult result = planner->run();
      const auto t1 = std::chrono::steady_clock::now();
      best_time = std::min(best_time, std::chrono::duration<double>(t1 - t0).count());
      run.planner = std::move(planner);
      run.result = std::move(result);
    }
    const Planner& p = *run.planner;
    const PlanResult& res = run.result;
    rep.wall_time = best_time;
    rep.iterations = p.iteration();
    rep.first_solution_iteration = res.first_solution_iteration;
    rep.best_cost = res.best_cost;
    if (res.best_node) rep.path_length = path_length(*p.problem().model, res.best_path);
    rep.violations =
        audit_tree(*p.problem().model, p.problem().obstacles, p.tree()).violations;
    rep.nodes = p.tree().size();
    rep.solutions = res.solutions.size();
    rep.solver_invocations = p.cache().solver_invocations();
    rep.cache_hits = p.cache().hits();
    rep.sdf_fits = p.sampler().snapshots().size();
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
    run.planner.reset();
  }
  return run;
}

}  // namespace

std::string_view baseline_name(Baseline b) {
  switch (b) {
    case Baseline::kOurs: return "ours";
    case Baseline::kNoCache: return "no-cache";
    case Baseline::kNoAdaptive: return "no-adaptive";
    case Baseline::kNoCacheNoAdaptive: return "no-cache-no-adaptive";
  }
  return "?";
}

Baseline parse_baseline(std::string_view name) {
  for (const Baseline b : kAllBaselines) {
    if (baseline_name(b) == name) return b;
  }
  throw std::invalid_argument("unknown baseline '" + std::string(name) + "'");
}

ScenarioConfig with_baseline(ScenarioConfig config, Baseline b) {
  config.gain_cache = b == Baseline::kOurs || b == Baseline::kNoAdaptive;
  config.adaptive_sampling = b == Baseline::kOurs || b == Baseline::kNoCache;
  return config;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
  if (text == "nan") return kNaN;
  if (text == "inf") return kInf;
  if (text == "-inf") return -kInf;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("bad number '" + std::string(text) + "'");
  }
  return v;
}

AuditResult audit_states(const DynamicsModel& model,
                         std::span<const ObstacleSpec> obstacles,
                         std::span<const State> states) {
  AuditResult audit;
  audit.worst_h = kInf;
  for (const auto& x : states) {
    const double h = min_h(obstacles, x, model);
    ++audit.states_checked;
    if (!(h >= 0.0)) ++audit.violations;
    audit.worst_h = std::min(audit.worst_h, h);
  }
  return audit;
}

AuditResult audit_tree(const DynamicsModel& model,
                       std::span<const ObstacleSpec> obstacles, const Tree& tree) {
  AuditResult total;
  total.worst_h = kInf;
  for (const auto& node : tree.nodes()) {
    for (const AuditResult& a :
         {audit_states(model, obstacles, node.segment.states),
          audit_states(model, obstacles, {&node.state, 1})}) {
      total.states_checked += a.states_checked;
      total.violations += a.violations;
      total.worst_h = std::min(total.worst_h, a.worst_h);
    }
  }
  return total;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate agg{kNaN, kNaN, 0};
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sum += v;
    ++agg.count;
  }
  if (agg.count == 0) return agg;
  agg.mean = sum / static_cast<double>(agg.count);
  if (agg.count >= 2) {
    double sq = 0.0;
    for (double v : values) {
      if (std::isfinite(v)) sq += (v - agg.mean) * (v - agg.mean);
    }
    agg.std = std::sqrt(sq / static_cast<double>(agg.count));
  }
  return agg;
}

void RunReport::summarize() {
  std::vector<double> time, cost, length, first;
  total_violations = 0;
  for (const auto& s : seeds) {
    if (!s.ok) continue;
    time.push_back(s.wall_time);
    cost.push_back(s.best_cost);
    length.push_back(s.path_length);
    first.push_back(s.first_solution_iteration
                        ? static_cast<double>(*s.first_solution_iteration)
                        : kNaN);
    total_violations += s.violations;
  }
  wall_time = aggregate(time);
  best_cost = aggregate(cost);
  path_length = aggregate(length);
  first_solution = aggregate(first);
}

ScenarioRun run_scenario(const ScenarioConfig& base, Baseline baseline,
                         const RunOptions& options) {
  const ScenarioConfig config = with_baseline(base, baseline);
  ScenarioRun out;
  out.report.scenario = config.name;
  out.report.baseline = std::string(baseline_name(baseline));
  out.runs.resize(config.seeds.size());

  const std::size_t jobs = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(options.jobs, 1)), 1, config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      out.runs[i] = run_seed(config, config.seeds[i]);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& r : out.runs) out.report.seeds.push_back(r.report);
  out.report.summarize();
  return out;
}

void write_report(std::ostream& out, const RunReport& report) {
  out << "lqrcbf-report 1\n";
  out << "scenario " << report.scenario << '\n';
  out << "baseline " << report.baseline << '\n';
  for (const auto& s : report.seeds) {
    out << "seed seed=" << s.seed << " ok=" << (s.ok ? 1 : 0)
        << " wall_time=" << format_number(s.wall_time)
        << " iterations=" << s.iterations << " first_solution="
        << (s.first_solution_iteration ? std::to_string(*s.first_solution_iteration)
                                       : std::string("none"))
        << " best_cost=" << format_number(s.best_cost)
        << " path_length=" << format_number(s.path_length)
        << " violations=" << s.violations << " nodes=" << s.nodes
        << " solutions=" << s.solutions
        << " solver_invocations=" << s.solver_invocations
        << " cache_hits=" << s.cache_hits << " sdf_fits=" << s.sdf_fits << '\n';
    if (!s.ok) out << "error " << s.seed << ' ' << s.error << '\n';
  }
  const std::pair<const char*, const Aggregate*> aggs[] = {
      {"wall_time", &report.wall_time},
      {"best_cost", &report.best_cost},
      {"path_length", &report.path_length},
      {"first_solution", &report.first_solution}};
  for (const auto& [name, a] : aggs) {
    out << "aggregate name=" << name << " mean=" << format_number(a->mean)
        << " std=" << format_number(a->std) << " count=" << a->count << '\n';
  }
  out << "total_violations " << report.total_violations << '\n';
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  RunReport report;
  std::string line;
  if (!std::getline(in, line) || line != "lqrcbf-report 1") {
    throw IoError(path.string() + ": not a run report");
  }
  while (std::getline(in, line)) {
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    const std::string& tag = tokens[0];
    if (tag == "scenario" && tokens.size() >= 2) {
      report.scenario = tokens[1];
    } else if (tag == "baseline" && tokens.size() >= 2) {
      report.baseline = tokens[1];
    } else if (tag == "seed") {
      auto kv = key_values(tokens, 1);
      SeedReport s;
      s.seed = parse_size(kv["seed"]);
      s.ok = kv["ok"] == "1";
      s.wall_time = parse_number(kv["wall_time"]);
      s.iterations = static_cast<int>(parse_size(kv["iterations"]));
      if (kv["first_solution"] != "none") {
        s.first_solution_iteration = static_cast<int>(parse_size(kv["first_solution"]));
      }
      s.best_cost = parse_number(kv["best_cost"]);
      s.path_length = parse_number(kv["path_length"]);
      s.violations = parse_size(kv["violations"]);
      s.nodes = parse_size(kv["nodes"]);
      s.solutions = parse_size(kv["solutions"]);
      s.solver_invocations = parse_size(kv["solver_invocations"]);
      s.cache_hits = parse_size(kv["cache_hits"]);
      s.sdf_fits = parse_size(kv["sdf_fits"]);
      report.seeds.push_back(s);
    } else if (tag == "error" && tokens.size() >= 2) {
      const auto seed = parse_size(tokens[1]);
      const auto pos = line.find(tokens[1]) + tokens[1].size();
      for (auto& s : report.seeds) {
        if (s.seed == seed) s.error = line.substr(std::min(pos + 1, line.size()));
      }
    }
  }
  report.summarize();
  return report;
}

void write_tree(std::ostream& out, const Planner& planner) {
  const auto& problem = planner.problem();
  out << "lqrcbf-tree 1\n";
  out << "model " << problem.model->name() << '\n';
  for (const auto& o : problem.obstacles) {
    out << "obstacle " << format_number(o.center.x()) << ' '
        << format_number(o.center.y()) << ' ' << format_number(o.radius) << '\n';
  }
  for (const auto& n : planner.tree().nodes()) {
    out << "node " << n.id << ' '
        << (n.parent ? static_cast<long long>(*n.parent) : -1LL) << ' '
        << format_number(n.cost_to_come);
    put_state(out, n.state);
    out << '\n';
  }
  for (const auto& n : planner.tree().nodes()) {
    for (const auto& x : n.segment.states) {
      out << "seg " << n.id;
      put_state(out, x);
      out << '\n';
    }
  }
}

void write_path(std::ostream& out, const Planner& planner, const PlanResult& result) {
  out << "lqrcbf-path 1\n";
  out << "cost " << format_number(result.best_cost) << '\n';
  out << "length "
      << format_number(result.best_node
                           ? path_length(*planner.problem().model, result.best_path)
                           : kNaN)
      << '\n';
  for (const auto& x : result.best_path) {
    out << "state";
    put_state(out, x);
    out << '\n';
  }
}

void write_sdf(std::ostream& out, const Sampler& sampler) {
  out << "lqrcbf-sdf 1\n";
  const auto& snaps = sampler.snapshots();
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const auto& s = snaps[i];
    out << "snapshot " << i << " call=" << s.call_index
        << " solutions=" << s.solutions << " converged=" << (s.converged ? 1 : 0)
        << " degenerate=" << (s.density.degenerate ? 1 : 0) << '\n';
    for (const auto& k : s.density.kernels()) {
      out << "kernel " << i << ' ' << format_number(k.mean.x()) << ' '
          << format_number(k.mean.y()) << ' ' << format_number(k.weight) << ' '
          << format_number(k.bandwidth.x()) << ' ' << format_number(k.bandwidth.y())
          << '\n';
    }
    for (const auto& e : s.elites) {
      out << "elite " << i << ' ' << format_number(e.x()) << ' '
          << format_number(e.y()) << '\n';
    }
  }
}

void write_cost_series(std::ostream& out, const PlanResult& result) {
  out << "lqrcbf-cost-series 1\n";
  for (std::size_t i = 0; i < result.best_cost_series.size(); ++i) {
    out << (i + 1) << ' ' << format_number(result.best_cost_series[i]) << '\n';
  }
}

void export_results(const ScenarioRun& run, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  {
    const auto path = out_dir / "report.txt";
    auto out = open_out(path);
    write_report(out, run.report);
    check(out, path);
  }
  for (const auto& seed_run : run.runs) {
    if (!seed_run.planner) continue;
    const auto dir = out_dir / ("seed_" + std::to_string(seed_run.report.seed));
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const Planner& p = *seed_run.planner;
    auto emit = [&](const char* name, auto&& writer) {
      const auto path = dir / name;
      auto out = open_out(path);
      writer(out);
      check(out, path);
    };
    emit("tree.txt", [&](std::ostream& o) { write_tree(o, p); });
    emit("path.txt", [&](std::ostream& o) { write_path(o, p, seed_run.result); });
    emit("sdf.txt", [&](std::ostream& o) { write_sdf(o, p.sampler()); });
    emit("cost_series.txt",
         [&](std::ostream& o) { write_cost_series(o, seed_run.result); });
  }
}

TreeDump read_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "lqrcbf-tree 1") {
    throw IoError(path.string() + ": not a tree dump");
  }
  TreeDump dump;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = split(line);
    if (t.empty()) continue;
    try {
      if (t[0] == "model" && t.size() == 2) {
        dump.model = t[1];
      } else if (t[0] == "obstacle" && t.size() == 4) {
        dump.obstacles.emplace_back(Point2{parse_number(t[1]), parse_number(t[2])},
                                    parse_number(t[3]));
      } else if (t[0] == "node" && t.size() >= 4) {
        TreeDump::Node n;
        n.id = parse_size(t[1]);
        n.parent = t[2] == "-1" ? -1 : static_cast<long long>(parse_size(t[2]));
        n.cost = parse_number(t[3]);
        for (std::size_t i = 4; i < t.size(); ++i) n.state.push_back(parse_number(t[i]));
        dump.nodes.push_back(std::move(n));
      } else if (t[0] == "seg" && t.size() >= 2) {
        dump.segment_owner.push_back(parse_size(t[1]));
        std::vector<double> x;
        for (std::size_t i = 2; i < t.size(); ++i) x.push_back(parse_number(t[i]));
        dump.segment_states.push_back(std::move(x));
      } else {
        throw IoError("unrecognized record");
      }
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return dump;
}

DumpAudit audit_dump(const TreeDump& dump) {
  DumpAudit result;
  const auto model = make_model(dump.model);
  const auto to_state = [&](const std::vector<double>& v) {
    if (v.size() != static_cast<std::size_t>(model->state_dim())) {
      throw IoError("state has " + std::to_string(v.size()) + " entries, expected " +
                    std::to_string(model->state_dim()));
    }
    State x(model->state_dim());
    for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
    return x;
  };
  std::vector<State> states;
  for (const auto& n : dump.nodes) states.push_back(to_state(n.state));
  for (const auto& s : dump.segment_states) states.push_back(to_state(s));
  result.safety = audit_states(*model, dump.obstacles, states);

  // Structure: ids dense, exactly one root, every parent chain reaches it.
  const std::size_t n = dump.nodes.size();
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = dump.nodes[i];
    if (node.id != i) {
      result.structure_ok = false;
      result.structure_error = "node ids are not dense at " + std::to_string(i);
      return result;
    }
    if (node.parent < 0) {
      ++roots;
    } else if (static_cast<std::size_t>(node.parent) >= n) {
      result.structure_ok = false;
      result.structure_error = "node " + std::to_string(i) + " has a missing parent";
      return result;
    }
  }
  if (n > 0 && roots != 1) {
    result.structure_ok = false;
    result.structure_error = std::to_string(roots) + " roots";
    return result;
  }
  for (std::size_t i = 0; i < n; ++i) {
    long long cur = static_cast<long long>(i);
    std::size_t hops = 0;
    while (cur >= 0 && hops <= n) {
      cur = dump.nodes[static_cast<std::size_t>(cur)].parent;
      ++hops;
    }
    if (hops > n) {
      result.structure_ok = false;
      result.structure_error = "cycle through node " + std::to_string(i);
      return result;
    }
  }
  return result;
}

void write_comparison(std::ostream& out, std::span<const RunReport> reports) {
  std::set<std::uint64_t> seed_set;
  for (const auto& r : reports) {
    for (const auto& s : r.seeds) seed_set.insert(s.seed);
  }
  std::vector<std::string> header{"scenario", "baseline"};
  for (const auto s : seed_set) header.push_back("seed_" + std::to_string(s));
  for (const char* h : {"mean", "std", "success", "mean_best_cost", "mean_length",
                        "violations"}) {
    header.emplace_back(h);
  }
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& r : reports) {
    std::vector<std::string> row{r.scenario, r.baseline};
    for (const auto seed : seed_set) {
      std::string cell = "-";
      for (const auto& s : r.seeds) {
        if (s.seed == seed) cell = s.ok ? format_number(s.wall_time) : "error";
      }
      row.push_back(cell);
    }
    std::size_t ok = 0, solved = 0;
    for (const auto& s : r.seeds) {
      ok += s.ok ? 1 : 0;
      solved += (s.ok && s.first_solution_iteration) ? 1 : 0;
    }
    row.push_back(format_number(r.wall_time.mean));
    row.push_back(format_number(r.wall_time.std));
    row.push_back(std::to_string(solved) + "/" + std::to_string(r.seeds.size()));
    row.push_back(format_number(r.best_cost.mean));
    row.push_back(format_number(r.path_length.mean));
    row.push_back(std::to_string(r.total_violations));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
}

}  // namespace lqrcbf
