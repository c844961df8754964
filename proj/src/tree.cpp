#include "lqrcbf/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace lqrcbf {

Tree::Tree(const DynamicsModel& model, const State& root)
    : ws_(model.workspace_indices()) {
  TreeNode node;
  node.id = 0;
  node.state = root;
  node.segment.states.push_back(root);
  node.segment.target = root;
  nodes_.push_back(std::move(node));
  xs_.push_back(root[ws_[0]]);
  ys_.push_back(root[ws_[1]]);
}

std::size_t Tree::add(std::size_t parent, const State& state,
                      Trajectory segment) {
  if (parent >= nodes_.size()) throw std::out_of_range("Tree::add: bad parent");
  TreeNode node;
  node.id = nodes_.size();
  node.state = state;
  node.parent = parent;
  node.cost_to_come = nodes_[parent].cost_to_come + segment.cost;
  node.segment = std::move(segment);
  nodes_[parent].children.push_back(node.id);
  xs_.push_back(state[ws_[0]]);
  ys_.push_back(state[ws_[1]]);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

bool Tree::is_ancestor(std::size_t ancestor, std::size_t id) const {
  std::optional<std::size_t> cur = id;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = nodes_[*cur].parent;
  }
  return false;
}

void Tree::reparent(std::size_t id, std::size_t new_parent, Trajectory segment) {
  if (id == 0) throw std::logic_error("Tree::reparent: cannot move the root");
  if (is_ancestor(id, new_parent)) {
    throw std::logic_error("Tree::reparent: would create a cycle");
  }
  TreeNode& node = nodes_[id];
  auto& siblings = nodes_[*node.parent].children;
  siblings.erase(std::find(siblings.begin(), siblings.end(), id));
  node.parent = new_parent;
  node.segment = std::move(segment);
  nodes_[new_parent].children.push_back(id);
  refresh_subtree(id);
}

void Tree::refresh_subtree(std::size_t id) {
  std::vector<std::size_t> stack{id};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    TreeNode& node = nodes_[cur];
    node.cost_to_come = nodes_[*node.parent].cost_to_come + node.segment.cost;
    stack.insert(stack.end(), node.children.begin(), node.children.end());
  }
}

std::vector<std::size_t> Tree::path_to(std::size_t id) const {
  std::vector<std::size_t> path;
  std::optional<std::size_t> cur = id;
  while (cur) {
    path.push_back(*cur);
    cur = nodes_.at(*cur).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<State> Tree::path_states(std::size_t id) const {
  std::vector<State> states;
  for (const std::size_t n : path_to(id)) {
    const auto& seg = nodes_[n].segment.states;
    states.insert(states.end(), seg.begin(), seg.end());
  }
  return states;
}

double Tree::total_cost() const {
  double total = 0.0;
  for (const auto& n : nodes_) total += n.cost_to_come;
  return total;
}

}  // namespace lqrcbf
