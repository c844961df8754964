#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lqrcbf/bench.hpp"
#include "lqrcbf/config.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string item =
        csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw CLI::ValidationError("--seeds", "'" + item + "' is not a seed");
    }
    seeds.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

int cmd_run(const std::string& config_path, const std::string& baseline,
            const std::string& seeds, int iterations, const std::string& out_dir,
            int jobs, int repeats) {
  lqrcbf::ScenarioConfig config = lqrcbf::load_config(config_path);
  if (!seeds.empty()) config.seeds = parse_seeds(seeds);
  if (iterations >= 0) config.planner.iterations = iterations;
  if (repeats > 0) config.timing_repeats = repeats;
  config.validate();

  std::vector<lqrcbf::Baseline> baselines;
  if (baseline == "all") {
    baselines.assign(std::begin(lqrcbf::kAllBaselines), std::end(lqrcbf::kAllBaselines));
  } else {
    baselines.push_back(lqrcbf::parse_baseline(baseline));
  }

  int status = 0;
  for (const auto b : baselines) {
    const auto run = lqrcbf::run_scenario(config, b, {jobs});
    const auto dir = std::filesystem::path(out_dir) / lqrcbf::baseline_name(b);
    lqrcbf::export_results(run, dir);
    const auto& r = run.report;
    std::cout << r.scenario << ' ' << r.baseline
              << " mean_time=" << lqrcbf::format_number(r.wall_time.mean)
              << " std_time=" << lqrcbf::format_number(r.wall_time.std)
              << " violations=" << r.total_violations << " -> "
              << (dir / "report.txt").string() << '\n';
    for (const auto& s : r.seeds) {
      if (!s.ok) {
        std::cerr << "seed " << s.seed << " failed: " << s.error << '\n';
        status = 1;
      }
    }
    if (r.total_violations > 0) status = 1;
  }
  return status;
}

int cmd_audit(const std::vector<std::string>& trees) {
  int status = 0;
  for (const auto& path : trees) {
    const auto dump = lqrcbf::read_tree(path);
    const auto audit = lqrcbf::audit_dump(dump);
    std::cout << path << " nodes=" << dump.nodes.size()
              << " states=" << audit.safety.states_checked
              << " violations=" << audit.safety.violations
              << " min_h=" << lqrcbf::format_number(audit.safety.worst_h)
              << " structure=" << (audit.structure_ok ? "ok" : audit.structure_error)
              << '\n';
    if (audit.safety.violations > 0 || !audit.structure_ok) status = 1;
  }
  return status;
}

int cmd_compare(const std::vector<std::string>& reports, const std::string& out) {
  std::vector<lqrcbf::RunReport> loaded;
  for (const auto& path : reports) loaded.push_back(lqrcbf::read_report(path));
  lqrcbf::write_comparison(std::cout, loaded);
  if (!out.empty()) {
    std::ofstream file(out);
    if (!file) throw lqrcbf::IoError("cannot write " + out);
    lqrcbf::write_comparison(file, loaded);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LQR-CBF-RRT* planner benchmark harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "plan a scenario over seeds and export results");
  std::string config_path, baseline = "ours", seeds, out_dir = "results";
  int iterations = -1, jobs = 1, repeats = 0;
  run->add_option("--config", config_path, "scenario YAML file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--baseline", baseline,
                  "ours | no-cache | no-adaptive | no-cache-no-adaptive | all");
  run->add_option("--seeds", seeds, "comma-separated seeds (overrides the config)");
  run->add_option("--iterations", iterations, "iterations per seed (overrides the config)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "seeds planned concurrently")->check(CLI::PositiveNumber);
  run->add_option("--repeats", repeats, "timing repeats per seed (min is reported)")
      ->check(CLI::PositiveNumber);

  auto* audit = app.add_subcommand("audit", "re-check tree dumps for safety violations");
  std::vector<std::string> trees;
  audit->add_option("trees", trees, "tree.txt files")->required()->check(CLI::ExistingFile);

  auto* compare = app.add_subcommand("compare", "summarize run reports side by side");
  std::vector<std::string> reports;
  std::string compare_out;
  compare->add_option("reports", reports, "report.txt files")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--out", compare_out, "also write the table to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(config_path, baseline, seeds, iterations, out_dir, jobs, repeats);
    }
    if (*audit) return cmd_audit(trees);
    if (*compare) return cmd_compare(reports, compare_out);
  } catch (const lqrcbf::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
