#include <cstdint>
#include <limits>

#include <omp.h>

#include "lqrcbf/kernels/neighbors.hpp"

namespace lqrcbf::kernels {

NearestHit nearest_parallel(std::span<const double> xs,
                            std::span<const double> ys, const Point2& q) {
  const auto n = static_cast<std::int64_t>(xs.size());
  NearestHit best{0, std::numeric_limits<double>::infinity()};
#pragma omp parallel
  {
    NearestHit local{0, std::numeric_limits<double>::infinity()};
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const double dx = xs[i] - q.x();
      const double dy = ys[i] - q.y();
      const double d = dx * dx + dy * dy;
      if (d < local.distance_sq) local = {static_cast<std::size_t>(i), d};
    }
#pragma omp critical(lqrcbf_nearest_merge)
    {
      if (local.distance_sq < best.distance_sq ||
          (local.distance_sq == best.distance_sq && local.index < best.index)) {
        best = local;
      }
    }
  }
  return best;
}

std::vector<std::size_t> within_radius_parallel(std::span<const double> xs,
                                                std::span<const double> ys,
                                                const Point2& q, double radius) {
  std::vector<std::size_t> hits;
  if (!(radius > 0.0)) return hits;
  const double r2 = radius * radius;
  const auto n = static_cast<std::int64_t>(xs.size());
  std::vector<std::uint8_t> inside(xs.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double dx = xs[i] - q.x();
    const double dy = ys[i] - q.y();
    inside[i] = dx * dx + dy * dy <= r2 ? 1 : 0;
  }
  for (std::size_t i = 0; i < inside.size(); ++i) {
    if (inside[i]) hits.push_back(i);
  }
  return hits;
}

}  // namespace lqrcbf::kernels
