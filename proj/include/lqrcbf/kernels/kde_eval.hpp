#pragma once

#include <cstddef>
#include <span>

#include "lqrcbf/kde.hpp"

namespace lqrcbf::kernels {

/// out[i] = density.pdf(points[i]).
void pdf_batch_serial(const KdeDensity& density, std::span<const Point2> points,
                      std::span<double> out);
void pdf_batch_parallel(const KdeDensity& density,
                        std::span<const Point2> points, std::span<double> out);

inline void pdf_batch(const KdeDensity& density, std::span<const Point2> points,
                      std::span<double> out, std::size_t parallel_threshold) {
  if (parallel_threshold != 0 && points.size() >= parallel_threshold) {
    pdf_batch_parallel(density, points, out);
  } else {
    pdf_batch_serial(density, points, out);
  }
}

}  // namespace lqrcbf::kernels
