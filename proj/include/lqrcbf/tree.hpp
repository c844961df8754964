#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lqrcbf/dynamics.hpp"

namespace lqrcbf {

struct TreeNode {
  std::size_t id;
  State state;
  std::optional<std::size_t> parent;
  double cost_to_come = 0.0;
  Trajectory segment;  // from the parent; a single state for the root
  std::vector<std::size_t> children;
};

/// Search tree rooted at the initial state. Node positions are mirrored in
/// contiguous arrays for the neighbor kernels.
class Tree {
 public:
  Tree(const DynamicsModel& model, const State& root);

  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }

  /// Appends a child of `parent`; cost = parent cost + segment.cost.
  std::size_t add(std::size_t parent, const State& state, Trajectory segment);

  /// Moves `id` under `new_parent` and refreshes the cost of its subtree.
  /// Throws std::logic_error if that would create a cycle.
  void reparent(std::size_t id, std::size_t new_parent, Trajectory segment);

  /// True if `ancestor` lies on the root path of `id` (or equals it).
  bool is_ancestor(std::size_t ancestor, std::size_t id) const;

  /// Node ids from the root to `id`.
  std::vector<std::size_t> path_to(std::size_t id) const;
  /// Concatenated segment states from the root to `id`.
  std::vector<State> path_states(std::size_t id) const;

  double total_cost() const;

 private:
  void refresh_subtree(std::size_t id);

  std::vector<TreeNode> nodes_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::array<int, 2> ws_;
};

}  // namespace lqrcbf
