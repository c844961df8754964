#include "lqrcbf/kernels/kde_eval.hpp"

#include <cstdint>
#include <stdexcept>

#include <omp.h>

namespace lqrcbf::kernels {

void pdf_batch_serial(const KdeDensity& density, std::span<const Point2> points,
                      std::span<double> out) {
  if (out.size() != points.size()) {
    throw std::invalid_argument("pdf_batch: output size mismatch");
  }
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = density.pdf(points[i]);
}

void pdf_batch_parallel(const KdeDensity& density,
                        std::span<const Point2> points, std::span<double> out) {
  if (out.size() != points.size()) {
    throw std::invalid_argument("pdf_batch: output size mismatch");
  }
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = density.pdf(points[i]);
}

}  // namespace lqrcbf::kernels
