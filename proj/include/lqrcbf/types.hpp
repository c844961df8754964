#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace lqrcbf {

// Upper bound on state and control dimension. Vectors are sized at runtime
// but live on the stack, so rollouts never touch the allocator.
inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                             kMaxDim, kMaxDim>;
using State = Vector;
using Control = Vector;
using Point2 = Eigen::Vector2d;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

}  // namespace lqrcbf
