#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lqrcbf/cbf.hpp"
#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/kde.hpp"
#include "lqrcbf/lqr.hpp"
#include "lqrcbf/sampler.hpp"
#include "lqrcbf/steering.hpp"
#include "lqrcbf/tree.hpp"

namespace lqrcbf {

class InfeasibleStart : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PlannerConfig {
  int iterations = 2000;             // N
  double lambda = 50.0;
  double eta = 5.0;                  // meters
  int dimension = 2;                 // d in the near-radius exponent
  Point2 goal{30.0, 24.0};
  double goal_radius = 1.5;          // r_goal
  double goal_attempt_radius = 10.0;
  std::uint64_t seed = 0;
  bool rewire = true;                // false: plain RRT (no ChooseParent/Rewire)
  bool use_cache = true;
  double duplicate_tolerance = 1e-6;
  std::size_t parallel_threshold = 4096;

  void validate() const;
};

/// Everything the planner needs besides its own tuning.
struct Problem {
  std::shared_ptr<const DynamicsModel> model;
  std::vector<ObstacleSpec> obstacles;
  CbfParams cbf;
  CostWeights weights;
  SteerConfig steer;
  State x_init;
};

struct PlannerStats {
  std::size_t samples = 0;
  std::size_t duplicates = 0;
  std::size_t empty_extensions = 0;
  std::size_t steer_calls = 0;
  std::size_t rewires = 0;
  std::size_t goal_attempts = 0;
};

struct PlanResult {
  std::optional<std::size_t> best_node;
  std::vector<State> best_path;  // concatenated segments root -> best_node
  double best_cost;              // +inf without a solution
  SolutionSet solutions;
  std::vector<double> best_cost_series;  // after each iteration
  std::optional<int> first_solution_iteration;
  PlannerStats stats;
};

/// Radius of the Near query for a tree of `vertices` nodes.
double near_radius(const PlannerConfig& config, std::size_t vertices);

/// LQR-CBF-RRT*. Holds references into its own members, so it is neither
/// copyable nor movable.
class Planner {
 public:
  Planner(Problem problem, PlannerConfig config, SamplerConfig sampler);
  Planner(const Planner&) = delete;
  Planner& operator=(const Planner&) = delete;

  std::size_t nearest(const Point2& p) const;
  double near_radius() const;
  std::vector<std::size_t> near(const Point2& p) const;

  struct ParentChoice {
    std::size_t parent;
    Trajectory segment;
    double cost;  // cost_to_come through `parent`
  };
  ParentChoice choose_parent(const State& x_new, std::span<const std::size_t> near,
                             std::size_t nearest, Trajectory sigma_nearest);
  /// Returns how many nodes were reparented under `new_id`.
  std::size_t rewire(std::size_t new_id, std::span<const std::size_t> near);
  /// Returns true if a solution was added to the set.
  bool extend_to_goal(std::size_t new_id);

  void step();
  PlanResult run();

  bool in_goal(const State& x) const;
  std::optional<std::size_t> best_goal_node() const;
  double best_cost() const;

  const Tree& tree() const { return tree_; }
  Tree& mutable_tree() { return tree_; }
  const SolutionSet& solutions() const { return solutions_; }
  const Sampler& sampler() const { return sampler_; }
  const GainCache& cache() const { return cache_; }
  const Steerer& steerer() const { return steerer_; }
  const Problem& problem() const { return problem_; }
  const PlannerConfig& config() const { return config_; }
  const PlannerStats& stats() const { return stats_; }
  int iteration() const { return iteration_; }

 private:
  Point2 ws(const State& x) const;
  void record_solution(std::size_t node);
  SteerResult steer(const State& from, const State& to);

  Problem problem_;
  PlannerConfig config_;
  GainCache cache_;
  Steerer steerer_;
  Sampler sampler_;
  Tree tree_;
  SolutionSet solutions_;
  std::vector<std::size_t> goal_nodes_;
  std::vector<double> series_;
  std::optional<int> first_solution_;
  PlannerStats stats_;
  int iteration_ = 0;
};

/// Builds a planner and runs all iterations.
PlanResult plan(Problem problem, PlannerConfig config, SamplerConfig sampler);

}  // namespace lqrcbf
