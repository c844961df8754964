#pragma once

// Linear-scan neighbor queries over a structure-of-arrays point cloud.
//
// Every kernel comes as a serial reference and an OpenMP version with the
// same contract; the dispatchers pick the parallel one once the cloud holds
// at least `parallel_threshold` points (0 disables it).

#include <cstddef>
#include <span>
#include <vector>

#include "lqrcbf/types.hpp"

namespace lqrcbf::kernels {

struct NearestHit {
  std::size_t index;
  double distance_sq;
};

/// Point closest to `q`; ties go to the lowest index. `xs` must be nonempty.
NearestHit nearest_serial(std::span<const double> xs, std::span<const double> ys,
                          const Point2& q);
NearestHit nearest_parallel(std::span<const double> xs,
                            std::span<const double> ys, const Point2& q);

/// Indices (ascending) of all points with |p - q| <= radius. Empty for
/// radius <= 0.
std::vector<std::size_t> within_radius_serial(std::span<const double> xs,
                                              std::span<const double> ys,
                                              const Point2& q, double radius);
std::vector<std::size_t> within_radius_parallel(std::span<const double> xs,
                                                std::span<const double> ys,
                                                const Point2& q, double radius);

inline NearestHit nearest(std::span<const double> xs, std::span<const double> ys,
                          const Point2& q, std::size_t parallel_threshold) {
  if (parallel_threshold != 0 && xs.size() >= parallel_threshold) {
    return nearest_parallel(xs, ys, q);
  }
  return nearest_serial(xs, ys, q);
}

inline std::vector<std::size_t> within_radius(std::span<const double> xs,
                                              std::span<const double> ys,
                                              const Point2& q, double radius,
                                              std::size_t parallel_threshold) {
  if (parallel_threshold != 0 && xs.size() >= parallel_threshold) {
    return within_radius_parallel(xs, ys, q, radius);
  }
  return within_radius_serial(xs, ys, q, radius);
}

}  // namespace lqrcbf::kernels
