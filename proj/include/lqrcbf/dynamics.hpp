#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lqrcbf/types.hpp"

namespace lqrcbf {

/// Saturation box applied to controls after the feedback policy.
struct ControlBounds {
  Control lower;
  Control upper;
};

/// Control-affine system xdot = f(x) + g(x) u with analytic Jacobians.
///
/// Concrete models also know how to project a state onto the 2-D workspace,
/// how to lift a workspace sample back into a full state, and how to take
/// differences between states when some coordinates are angles.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::string_view name() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;

  virtual State drift(const State& x) const = 0;
  virtual Matrix input_map(const State& x) const = 0;
  virtual Matrix state_jacobian(const State& x, const Control& u) const = 0;
  virtual Matrix control_jacobian(const State& x, const Control& u) const = 0;

  /// Indices of the two workspace (position) coordinates in the state.
  virtual std::array<int, 2> workspace_indices() const = 0;
  /// Control used as the linearization point.
  virtual Control nominal_control() const = 0;
  /// True when the Jacobians do not depend on the operating point.
  virtual bool is_linear() const { return false; }

  /// Canonical representative of a state (heading wrap for angular states).
  virtual State normalize(const State& x) const { return x; }
  /// x - ref, with angular coordinates taken as the wrapped difference.
  virtual State difference(const State& x, const State& ref) const {
    return x - ref;
  }
  /// Maps a raw policy output onto the admissible control set.
  virtual Control admissible(const Control& u) const;
  /// Completes a workspace point into a full state. `from` is the state the
  /// planner will steer from and fixes coordinates the sampler does not draw.
  virtual State lift(const Point2& p, const State& from) const = 0;

  Point2 workspace(const State& x) const {
    const auto idx = workspace_indices();
    return {x[idx[0]], x[idx[1]]};
  }

  void set_control_bounds(std::optional<ControlBounds> bounds) {
    bounds_ = std::move(bounds);
  }
  const std::optional<ControlBounds>& control_bounds() const {
    return bounds_;
  }

 protected:
  Control clamp(const Control& u) const;

 private:
  std::optional<ControlBounds> bounds_;
};

/// Planar double integrator, state [x1, x1dot, x3, x3dot], control [u1, u2].
class DoubleIntegrator final : public DynamicsModel {
 public:
  std::string_view name() const override { return "double_integrator_4d"; }
  int state_dim() const override { return 4; }
  int control_dim() const override { return 2; }
  State drift(const State& x) const override;
  Matrix input_map(const State& x) const override;
  Matrix state_jacobian(const State& x, const Control& u) const override;
  Matrix control_jacobian(const State& x, const Control& u) const override;
  std::array<int, 2> workspace_indices() const override { return {0, 2}; }
  Control nominal_control() const override { return Control::Zero(2); }
  bool is_linear() const override { return true; }
  State lift(const Point2& p, const State& from) const override;
};

/// Unicycle, state [x1, x2, theta], control [v, omega]. The translational
/// speed is held at a fixed value; feedback only shapes omega.
class Unicycle final : public DynamicsModel {
 public:
  explicit Unicycle(double fixed_speed = 1.0);

  std::string_view name() const override { return "unicycle"; }
  int state_dim() const override { return 3; }
  int control_dim() const override { return 2; }
  State drift(const State& x) const override;
  Matrix input_map(const State& x) const override;
  Matrix state_jacobian(const State& x, const Control& u) const override;
  Matrix control_jacobian(const State& x, const Control& u) const override;
  std::array<int, 2> workspace_indices() const override { return {0, 1}; }
  Control nominal_control() const override;
  State normalize(const State& x) const override;
  State difference(const State& x, const State& ref) const override;
  Control admissible(const Control& u) const override;
  State lift(const Point2& p, const State& from) const override;

  double fixed_speed() const { return fixed_speed_; }

 private:
  double fixed_speed_;
};

struct ModelOptions {
  double unicycle_speed = 1.0;
  std::optional<ControlBounds> control_bounds;
};

/// Builds a model by registry name ("double_integrator_4d", "unicycle").
/// Throws std::invalid_argument for unknown names.
std::shared_ptr<DynamicsModel> make_model(std::string_view name,
                                          const ModelOptions& options = {});

/// f(x) + g(x) u.
State eval_dynamics(const DynamicsModel& model, const State& x,
                    const Control& u);

/// One explicit Euler step, re-normalized (heading wrap).
State integrate_step(const DynamicsModel& model, const State& x,
                     const Control& u, double dt);

/// Paired state/control sequences at a fixed step. `target` is the state the
/// trajectory was steered toward and the reference its cost is measured to.
struct Trajectory {
  std::vector<State> states;
  std::vector<Control> controls;
  double dt = 0.05;
  double cost = 0.0;
  State target;

  const State& front() const { return states.front(); }
  const State& back() const { return states.back(); }
  std::size_t steps() const { return controls.size(); }
};

/// Euclidean length of the workspace projection of a state sequence.
double path_length(const DynamicsModel& model, const std::vector<State>& states);

}  // namespace lqrcbf
