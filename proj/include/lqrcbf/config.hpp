#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lqrcbf/cbf.hpp"
#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/kde.hpp"
#include "lqrcbf/lqr.hpp"
#include "lqrcbf/planner.hpp"
#include "lqrcbf/sampler.hpp"
#include "lqrcbf/steering.hpp"

namespace lqrcbf {

/// The file could not be read or is not well-formed YAML.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The file parsed but a value is missing, malformed or inconsistent.
/// `field()` is the dotted path of the offending key.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string model = "double_integrator_4d";
  ModelOptions model_options;
  Box2 workspace{{0.0, 0.0}, {50.0, 30.0}};
  std::vector<ObstacleSpec> obstacles;
  std::vector<double> start{2.0, 2.0};  // workspace point or full state
  Point2 goal{30.0, 24.0};
  double goal_radius = 1.5;
  double cbf_k1 = 6.0;
  double cbf_k2 = 1.5;
  ZetaForm unicycle_form = ZetaForm::kUnicycleDerived;
  std::vector<double> q_diag;  // empty: identity
  std::vector<double> r_diag;
  SteerConfig steer;
  PlannerConfig planner;
  SamplerConfig sampler;
  bool gain_cache = true;
  bool adaptive_sampling = true;
  std::vector<std::uint64_t> seeds{0, 20, 42, 45, 100};
  int timing_repeats = 1;

  /// Fails with ValidationError on the first bad field.
  void validate() const;
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text);

/// Model, obstacles, weights and initial state ready for the planner.
Problem make_problem(const ScenarioConfig& config);
/// Planner and sampler settings for one seed, with the baseline toggles
/// applied.
PlannerConfig planner_config(const ScenarioConfig& config, std::uint64_t seed);
SamplerConfig sampler_config(const ScenarioConfig& config);

}  // namespace lqrcbf
