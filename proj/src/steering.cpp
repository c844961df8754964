#include "lqrcbf/steering.hpp"

#include <stdexcept>

namespace lqrcbf {
namespace {

double stage_cost(const State& e, const Control& u, const Matrix& Q,
                  const Matrix& R) {
  return e.dot(Q * e) + u.dot(R * u);
}

}  // namespace

void SteerConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("steer.dt must be > 0");
  if (max_steps < 1) throw std::invalid_argument("steer.max_steps must be >= 1");
  if (!(goal_tolerance > 0.0)) {
    throw std::invalid_argument("steer.goal_tolerance must be > 0");
  }
}

double trajectory_cost(const DynamicsModel& model, const Trajectory& sigma,
                       const CostWeights& weights, const State& x_ref) {
  const Matrix Q = weights.Q;
  const Matrix R = weights.R;
  double cost = 0.0;
  for (std::size_t t = 0; t < sigma.controls.size(); ++t) {
    const State e = model.difference(sigma.states[t], x_ref);
    cost += stage_cost(e, sigma.controls[t], Q, R) * sigma.dt;
  }
  return cost;
}

Steerer::Steerer(const DynamicsModel& model,
                 std::span<const ObstacleSpec> obstacles, const CbfParams& cbf,
                 const CostWeights& weights, const SteerConfig& config,
                 GainCache& cache)
    : model_(model),
      obstacles_(obstacles),
      cbf_(cbf),
      weights_(weights),
      config_(config),
      cache_(cache) {
  config_.validate();
}

bool Steerer::within_tolerance(const State& x, const State& goal) const {
  return (model_.workspace(x) - model_.workspace(goal)).norm() <=
         config_.goal_tolerance;
}

bool Steerer::step_is_safe(const State& next, const Control& u) const {
  if (!check_constraints(obstacles_, cbf_, next, u).satisfied) return false;
  return min_h(obstacles_, next, model_) >= 0.0;
}

SteerResult Steerer::steer(const State& x_current, const State& x_next) const {
  return rollout(x_current, x_next, true);
}

Trajectory Steerer::unconstrained_rollout(const State& x_current,
                                          const State& x_next) const {
  return rollout(x_current, x_next, false).trajectory;
}

SteerResult Steerer::rollout(const State& x_current, const State& x_next,
                             bool enforce) const {
  SteerResult result{SteerStatus::kHorizon, {}};
  Trajectory& traj = result.trajectory;
  traj.dt = config_.dt;
  traj.target = x_next;
  traj.states.reserve(static_cast<std::size_t>(config_.max_steps) + 1);
  traj.controls.reserve(static_cast<std::size_t>(config_.max_steps));
  traj.states.push_back(x_current);
  if (within_tolerance(x_current, x_next)) {
    result.status = SteerStatus::kReached;
    return result;
  }

  const Matrix K = gain_for_goal(cache_, model_, weights_, x_next).K;
  const Matrix Q = weights_.Q;
  const Matrix R = weights_.R;

  State x = x_current;
  double cost = 0.0;
  for (int t = 0; t < config_.max_steps; ++t) {
    const State e = model_.difference(x, x_next);
    Control raw = Control::Zero(K.rows());
    raw.noalias() -= K * e;
    const Control u = model_.admissible(raw);
    const State next = integrate_step(model_, x, u, config_.dt);
    if (enforce && !step_is_safe(next, u)) {
      result.status = t == 0 ? SteerStatus::kEmptyExtension
                             : SteerStatus::kTruncated;
      break;
    }
    cost += stage_cost(e, u, Q, R) * config_.dt;
    traj.states.push_back(next);
    traj.controls.push_back(u);
    x = next;
    if (within_tolerance(x, x_next)) {
      result.status = SteerStatus::kReached;
      break;
    }
  }
  traj.cost = cost;
  return result;
}

}  // namespace lqrcbf
