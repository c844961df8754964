#include "lqrcbf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lqrcbf/kernels/neighbors.hpp"

namespace lqrcbf {

void PlannerConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("planner.iterations must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("planner.lambda must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("planner.eta must be > 0");
  if (dimension < 1) throw std::invalid_argument("planner.dimension must be >= 1");
  if (!goal.allFinite()) throw std::invalid_argument("planner.goal must be finite");
  if (!(goal_radius > 0.0)) {
    throw std::invalid_argument("planner.goal_radius must be > 0");
  }
  if (!(goal_attempt_radius >= 0.0)) {
    throw std::invalid_argument("planner.goal_attempt_radius must be >= 0");
  }
  if (!(duplicate_tolerance >= 0.0)) {
    throw std::invalid_argument("planner.duplicate_tolerance must be >= 0");
  }
}

double near_radius(const PlannerConfig& config, std::size_t vertices) {
  if (vertices <= 1) return 0.0;
  const double n = static_cast<double>(vertices);
  const double r = config.lambda *
                   std::pow(std::log(n) / n, 1.0 / (config.dimension + 1));
  return std::min(r, config.eta);
}

Planner::Planner(Problem problem, PlannerConfig config, SamplerConfig sampler)
    : problem_(std::move(problem)),
      config_(std::move(config)),
      cache_(config_.use_cache),
      steerer_(*problem_.model, problem_.obstacles, problem_.cbf,
               problem_.weights, problem_.steer, cache_),
      sampler_(std::move(sampler), config_.seed),
      tree_(*problem_.model, problem_.x_init) {
  config_.validate();
  const auto& model = *problem_.model;
  if (problem_.x_init.size() != model.state_dim() ||
      !problem_.x_init.allFinite()) {
    throw std::invalid_argument("planner: x_init has the wrong dimension");
  }
  const double h0 = min_h(problem_.obstacles, problem_.x_init, model);
  if (h0 < 0.0) {
    throw InfeasibleStart("planner: x_init lies inside an obstacle (h = " +
                          std::to_string(h0) + ")");
  }
  if (in_goal(problem_.x_init)) goal_nodes_.push_back(0);
}

Point2 Planner::ws(const State& x) const { return problem_.model->workspace(x); }

bool Planner::in_goal(const State& x) const {
  return (ws(x) - config_.goal).norm() <= config_.goal_radius;
}

SteerResult Planner::steer(const State& from, const State& to) {
  ++stats_.steer_calls;
  return steerer_.steer(from, to);
}

std::size_t Planner::nearest(const Point2& p) const {
  return kernels::nearest(tree_.xs(), tree_.ys(), p,
                          config_.parallel_threshold)
      .index;
}

double Planner::near_radius() const {
  return lqrcbf::near_radius(config_, tree_.size());
}

std::vector<std::size_t> Planner::near(const Point2& p) const {
  return kernels::within_radius(tree_.xs(), tree_.ys(), p,
                                near_radius(), config_.parallel_threshold);
}

Planner::ParentChoice Planner::choose_parent(const State& x_new,
                                             std::span<const std::size_t> near,
                                             std::size_t nearest,
                                             Trajectory sigma_nearest) {
  ParentChoice best{nearest, std::move(sigma_nearest), 0.0};
  best.cost = tree_.node(nearest).cost_to_come + best.segment.cost;
  for (const std::size_t id : near) {
    if (id == nearest) continue;
    const TreeNode& cand = tree_.node(id);
    if (cand.cost_to_come >= best.cost) continue;  // cannot win
    SteerResult res = steer(cand.state, x_new);
    if (!res.reached()) continue;
    const double cost = cand.cost_to_come + res.trajectory.cost;
    if (cost < best.cost) {
      best = {id, std::move(res.trajectory), cost};
    }
  }
  return best;
}

std::size_t Planner::rewire(std::size_t new_id,
                            std::span<const std::size_t> near) {
  std::size_t count = 0;
  for (const std::size_t id : near) {
    if (id == new_id || id == 0) continue;
    const double base = tree_.node(new_id).cost_to_come;
    if (base >= tree_.node(id).cost_to_come) continue;
    if (tree_.is_ancestor(id, new_id)) continue;
    SteerResult res = steer(tree_.node(new_id).state, tree_.node(id).state);
    if (!res.reached()) continue;
    if (base + res.trajectory.cost < tree_.node(id).cost_to_come) {
      tree_.reparent(id, new_id, std::move(res.trajectory));
      ++count;
    }
  }
  stats_.rewires += count;
  return count;
}

void Planner::record_solution(std::size_t node) {
  Solution sol;
  const auto states = tree_.path_states(node);
  sol.waypoints.reserve(states.size());
  for (const auto& s : states) sol.waypoints.push_back(ws(s));
  sol.cost = tree_.node(node).cost_to_come;
  solutions_.push_back(std::move(sol));
  if (std::find(goal_nodes_.begin(), goal_nodes_.end(), node) ==
      goal_nodes_.end()) {
    goal_nodes_.push_back(node);
  }
  if (!first_solution_) first_solution_ = iteration_;
}

bool Planner::extend_to_goal(std::size_t new_id) {
  const State x_new = tree_.node(new_id).state;
  const double dist = (ws(x_new) - config_.goal).norm();
  if (dist <= config_.goal_radius) {
    record_solution(new_id);
    return true;
  }
  if (dist > config_.goal_attempt_radius) return false;
  ++stats_.goal_attempts;
  const State x_goal = problem_.model->lift(config_.goal, x_new);
  SteerResult res = steer(x_new, x_goal);
  if (!res.extended() || !in_goal(res.trajectory.back())) return false;
  const State end = res.trajectory.back();
  const std::size_t goal_id = tree_.add(new_id, end, std::move(res.trajectory));
  record_solution(goal_id);
  return true;
}

void Planner::step() {
  ++iteration_;
  ++stats_.samples;
  const auto& model = *problem_.model;
  const Point2 sample = sampler_.sample(solutions_);
  const std::size_t nearest_id = nearest(sample);
  const State x_from = tree_.node(nearest_id).state;
  if ((ws(x_from) - sample).norm() <= config_.duplicate_tolerance) {
    ++stats_.duplicates;
    series_.push_back(best_cost());
    return;
  }
  const State x_samp = model.lift(sample, x_from);
  SteerResult res = steer(x_from, x_samp);
  if (!res.extended()) {
    ++stats_.empty_extensions;
    series_.push_back(best_cost());
    return;
  }
  const State x_new = res.trajectory.back();
  std::size_t new_id;
  if (config_.rewire) {
    const auto near_ids = near(ws(x_new));
    ParentChoice choice =
        choose_parent(x_new, near_ids, nearest_id, std::move(res.trajectory));
    // The winning segment only ends near x_new; store where it really ends so
    // the path has no gap at this node.
    const State reached = choice.segment.states.back();
    new_id = tree_.add(choice.parent, reached, std::move(choice.segment));
    rewire(new_id, near_ids);
  } else {
    new_id = tree_.add(nearest_id, x_new, std::move(res.trajectory));
  }
  extend_to_goal(new_id);
  series_.push_back(best_cost());
}

std::optional<std::size_t> Planner::best_goal_node() const {
  std::optional<std::size_t> best;
  double cost = std::numeric_limits<double>::infinity();
  for (const std::size_t id : goal_nodes_) {
    const double c = tree_.node(id).cost_to_come;
    if (c < cost) {
      cost = c;
      best = id;
    }
  }
  return best;
}

double Planner::best_cost() const {
  const auto id = best_goal_node();
  return id ? tree_.node(*id).cost_to_come
            : std::numeric_limits<double>::infinity();
}

PlanResult Planner::run() {
  while (iteration_ < config_.iterations) step();
  PlanResult result;
  result.best_node = best_goal_node();
  result.best_cost = best_cost();
  if (result.best_node) result.best_path = tree_.path_states(*result.best_node);
  result.solutions = solutions_;
  result.best_cost_series = series_;
  result.first_solution_iteration = first_solution_;
  result.stats = stats_;
  return result;
}

PlanResult plan(Problem problem, PlannerConfig config, SamplerConfig sampler) {
  Planner planner(std::move(problem), std::move(config), std::move(sampler));
  return planner.run();
}

}  // namespace lqrcbf
