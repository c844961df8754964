#include "lqrcbf/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lqrcbf {

Control DynamicsModel::clamp(const Control& u) const {
  if (!bounds_) return u;
  return u.cwiseMax(bounds_->lower).cwiseMin(bounds_->upper);
}

Control DynamicsModel::admissible(const Control& u) const { return clamp(u); }

// ---------------------------------------------------------------------------
// Double integrator

State DoubleIntegrator::drift(const State& x) const {
  State f(4);
  f << x[1], 0.0, x[3], 0.0;
  return f;
}

Matrix DoubleIntegrator::input_map(const State&) const {
  Matrix g = Matrix::Zero(4, 2);
  g(1, 0) = 1.0;
  g(3, 1) = 1.0;
  return g;
}

Matrix DoubleIntegrator::state_jacobian(const State&, const Control&) const {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = 1.0;
  a(2, 3) = 1.0;
  return a;
}

Matrix DoubleIntegrator::control_jacobian(const State& x,
                                          const Control&) const {
  return input_map(x);
}

State DoubleIntegrator::lift(const Point2& p, const State&) const {
  State x(4);
  x << p.x(), 0.0, p.y(), 0.0;
  return x;
}

// ---------------------------------------------------------------------------
// Unicycle

Unicycle::Unicycle(double fixed_speed) : fixed_speed_(fixed_speed) {
  if (!(fixed_speed > 0.0) || !std::isfinite(fixed_speed)) {
    throw std::invalid_argument("unicycle: fixed speed must be positive");
  }
}

State Unicycle::drift(const State&) const { return State::Zero(3); }

Matrix Unicycle::input_map(const State& x) const {
  Matrix g = Matrix::Zero(3, 2);
  g(0, 0) = std::cos(x[2]);
  g(1, 0) = std::sin(x[2]);
  g(2, 1) = 1.0;
  return g;
}

Matrix Unicycle::state_jacobian(const State& x, const Control& u) const {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 2) = -u[0] * std::sin(x[2]);
  a(1, 2) = u[0] * std::cos(x[2]);
  return a;
}

Matrix Unicycle::control_jacobian(const State& x, const Control&) const {
  return input_map(x);
}

Control Unicycle::nominal_control() const {
  Control u(2);
  u << fixed_speed_, 0.0;
  return u;
}

State Unicycle::normalize(const State& x) const {
  State y = x;
  y[2] = wrap_angle(y[2]);
  return y;
}

State Unicycle::difference(const State& x, const State& ref) const {
  State d = x - ref;
  d[2] = wrap_angle(d[2]);
  return d;
}

Control Unicycle::admissible(const Control& u) const {
  Control c = u;
  c[0] = fixed_speed_;
  c = clamp(c);
  c[0] = fixed_speed_;
  return c;
}

State Unicycle::lift(const Point2& p, const State& from) const {
  State x(3);
  const Point2 d = p - workspace(from);
  const double heading =
      d.squaredNorm() > 0.0 ? std::atan2(d.y(), d.x()) : from[2];
  x << p.x(), p.y(), wrap_angle(heading);
  return x;
}

// ---------------------------------------------------------------------------

std::shared_ptr<DynamicsModel> make_model(std::string_view name,
                                          const ModelOptions& options) {
  std::shared_ptr<DynamicsModel> model;
  if (name == "double_integrator_4d") {
    model = std::make_shared<DoubleIntegrator>();
  } else if (name == "unicycle") {
    model = std::make_shared<Unicycle>(options.unicycle_speed);
  } else {
    throw std::invalid_argument("unknown dynamics model '" +
                                std::string(name) + "'");
  }
  if (options.control_bounds) {
    const auto& b = *options.control_bounds;
    if (b.lower.size() != model->control_dim() ||
        b.upper.size() != model->control_dim()) {
      throw std::invalid_argument("control bounds have wrong dimension");
    }
    if ((b.lower.array() > b.upper.array()).any()) {
      throw std::invalid_argument("control bounds: lower exceeds upper");
    }
  }
  model->set_control_bounds(options.control_bounds);
  return model;
}

State eval_dynamics(const DynamicsModel& model, const State& x,
                    const Control& u) {
  return model.drift(x) + model.input_map(x) * u;
}

State integrate_step(const DynamicsModel& model, const State& x,
                     const Control& u, double dt) {
  return model.normalize(x + dt * eval_dynamics(model, x, u));
}

double path_length(const DynamicsModel& model,
                   const std::vector<State>& states) {
  double length = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) {
    length += (model.workspace(states[i]) - model.workspace(states[i - 1]))
                  .norm();
  }
  return length;
}

}  // namespace lqrcbf
