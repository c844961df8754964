#include <limits>

#include "lqrcbf/kernels/neighbors.hpp"

namespace lqrcbf::kernels {

NearestHit nearest_serial(std::span<const double> xs, std::span<const double> ys,
                          const Point2& q) {
  NearestHit best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - q.x();
    const double dy = ys[i] - q.y();
    const double d = dx * dx + dy * dy;
    if (d < best.distance_sq) best = {i, d};
  }
  return best;
}

std::vector<std::size_t> within_radius_serial(std::span<const double> xs,
                                              std::span<const double> ys,
                                              const Point2& q, double radius) {
  std::vector<std::size_t> hits;
  if (!(radius > 0.0)) return hits;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - q.x();
    const double dy = ys[i] - q.y();
    if (dx * dx + dy * dy <= r2) hits.push_back(i);
  }
  return hits;
}

}  // namespace lqrcbf::kernels
