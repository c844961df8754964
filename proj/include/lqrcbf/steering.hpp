#pragma once

#include <span>
#include <vector>

#include "lqrcbf/cbf.hpp"
#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/lqr.hpp"

namespace lqrcbf {

struct SteerConfig {
  double dt = 0.05;            // seconds
  int max_steps = 100;         // horizon T
  double goal_tolerance = 0.1; // workspace meters

  void validate() const;
};

enum class SteerStatus {
  kReached,         // within goal_tolerance of the local goal
  kHorizon,         // max_steps used up
  kTruncated,       // stopped before the first constraint violation
  kEmptyExtension,  // the very first step already violates
};

struct SteerResult {
  SteerStatus status;
  Trajectory trajectory;

  bool reached() const { return status == SteerStatus::kReached; }
  /// At least one step was taken.
  bool extended() const { return trajectory.steps() > 0; }
};

/// sum_t (e_t^T Q e_t + u_t^T R u_t) dt with e_t = x_t - x_ref over the
/// states that a control was applied from. Zero for a single state.
double trajectory_cost(const DynamicsModel& model, const Trajectory& sigma,
                       const CostWeights& weights, const State& x_ref);

/// LQR rollout toward a local goal, cut at the first step whose successor
/// state fails the CBF check (zeta_i(x', u) >= 0 and h_i(x') >= 0).
///
/// Holds references only; all referenced objects must outlive the steerer.
class Steerer {
 public:
  Steerer(const DynamicsModel& model, std::span<const ObstacleSpec> obstacles,
          const CbfParams& cbf, const CostWeights& weights,
          const SteerConfig& config, GainCache& cache);

  SteerResult steer(const State& x_current, const State& x_next) const;

  /// The same rollout with all safety checks disabled; used to audit the
  /// prefix property.
  Trajectory unconstrained_rollout(const State& x_current,
                                   const State& x_next) const;

  bool within_tolerance(const State& x, const State& goal) const;
  /// Candidate step is admissible (constraints hold at the successor).
  bool step_is_safe(const State& next, const Control& u) const;

  const DynamicsModel& model() const { return model_; }
  const CostWeights& weights() const { return weights_; }
  const SteerConfig& config() const { return config_; }
  std::span<const ObstacleSpec> obstacles() const { return obstacles_; }
  GainCache& cache() const { return cache_; }

 private:
  SteerResult rollout(const State& x_current, const State& x_next,
                      bool enforce) const;

  const DynamicsModel& model_;
  std::span<const ObstacleSpec> obstacles_;
  const CbfParams& cbf_;
  const CostWeights& weights_;
  const SteerConfig& config_;
  GainCache& cache_;
};

}  // namespace lqrcbf
