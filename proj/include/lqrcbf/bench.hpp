#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lqrcbf/config.hpp"
#include "lqrcbf/planner.hpp"

namespace lqrcbf {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Baseline { kOurs, kNoCache, kNoAdaptive, kNoCacheNoAdaptive };

inline constexpr Baseline kAllBaselines[] = {
    Baseline::kOurs, Baseline::kNoCache, Baseline::kNoAdaptive,
    Baseline::kNoCacheNoAdaptive};

std::string_view baseline_name(Baseline b);
/// Throws std::invalid_argument for unknown names.
Baseline parse_baseline(std::string_view name);
/// Copy of `config` with the baseline's cache/adaptive toggles.
ScenarioConfig with_baseline(ScenarioConfig config, Baseline b);

/// Shortest decimal text that reads back to the same double; "inf", "-inf"
/// and "nan" for non-finite values.
std::string format_number(double v);
double parse_number(std::string_view text);

struct AuditResult {
  std::size_t states_checked = 0;
  std::size_t violations = 0;
  double worst_h;  // smallest h seen, +inf with no obstacles
};

/// Re-checks every node state and every stored segment state against all
/// obstacles (h >= 0).
AuditResult audit_tree(const DynamicsModel& model,
                       std::span<const ObstacleSpec> obstacles,
                       const Tree& tree);
AuditResult audit_states(const DynamicsModel& model,
                         std::span<const ObstacleSpec> obstacles,
                         std::span<const State> states);

struct SeedReport {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double wall_time = 0.0;  // seconds, plan() only; min over timing repeats
  int iterations = 0;
  std::optional<int> first_solution_iteration;
  double best_cost;
  double path_length;  // nan without a path
  std::size_t violations = 0;
  std::size_t nodes = 0;
  std::size_t solutions = 0;
  std::size_t solver_invocations = 0;
  std::size_t cache_hits = 0;
  std::size_t sdf_fits = 0;
};

struct Aggregate {
  double mean;
  double std;  // population std, nan for fewer than 2 values
  std::size_t count = 0;
};

/// Mean and population standard deviation of the finite entries.
Aggregate aggregate(std::span<const double> values);

struct RunReport {
  std::string scenario;
  std::string baseline;
  std::vector<SeedReport> seeds;
  Aggregate wall_time;
  Aggregate best_cost;
  Aggregate path_length;
  Aggregate first_solution;
  std::size_t total_violations = 0;

  void summarize();
};

/// A finished planner instance together with its outcome.
struct SeedRun {
  SeedReport report;
  std::unique_ptr<Planner> planner;  // null if the seed failed
  PlanResult result;
};

struct ScenarioRun {
  RunReport report;
  std::vector<SeedRun> runs;  // same order as the config's seeds
};

struct RunOptions {
  int jobs = 1;  // seeds run concurrently
};

/// Runs every seed of `config` under `baseline`. Planner errors are recorded
/// per seed and do not stop the other seeds.
ScenarioRun run_scenario(const ScenarioConfig& config, Baseline baseline,
                         const RunOptions& options = {});

/// Writes report.txt plus, per successful seed, tree/path/sdf/cost-series
/// files under `out_dir/seed_<s>/`. Throws IoError.
void export_results(const ScenarioRun& run, const std::filesystem::path& out_dir);

void write_report(std::ostream& out, const RunReport& report);
void write_tree(std::ostream& out, const Planner& planner);
void write_path(std::ostream& out, const Planner& planner, const PlanResult& result);
void write_sdf(std::ostream& out, const Sampler& sampler);
void write_cost_series(std::ostream& out, const PlanResult& result);

RunReport read_report(const std::filesystem::path& path);

/// Contents of a tree dump, enough to audit it without the config.
struct TreeDump {
  std::string model;
  std::vector<ObstacleSpec> obstacles;
  struct Node {
    std::size_t id;
    long long parent;  // -1 for the root
    double cost;
    std::vector<double> state;
  };
  std::vector<Node> nodes;
  std::vector<std::vector<double>> segment_states;
  std::vector<std::size_t> segment_owner;
};

TreeDump read_tree(const std::filesystem::path& path);

struct DumpAudit {
  AuditResult safety;
  bool structure_ok = true;  // parents exist, single root, acyclic
  std::string structure_error;
};
DumpAudit audit_dump(const TreeDump& dump);

/// Table-style text: one row per report with per-seed wall times, mean and
/// std, then success and cost columns.
void write_comparison(std::ostream& out, std::span<const RunReport> reports);

}  // namespace lqrcbf
