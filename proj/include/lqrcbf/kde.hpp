#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/types.hpp"

namespace lqrcbf {

/// A safe trajectory that ends in the goal region, kept as its workspace
/// trace, together with its total cost from the root.
struct Solution {
  std::vector<Point2> waypoints;
  double cost = 0.0;
};

using SolutionSet = std::vector<Solution>;

/// Axis-aligned workspace box.
struct Box2 {
  Point2 lower;
  Point2 upper;

  bool contains(const Point2& p) const {
    return (p.array() >= lower.array()).all() &&
           (p.array() <= upper.array()).all();
  }
  double area() const { return (upper - lower).prod(); }
};

struct GaussianKernel {
  Point2 mean;
  double weight;
  Point2 bandwidth;  // per-dimension standard deviation
};

/// Weighted mixture of axis-aligned Gaussians on the workspace plane.
/// Weights are renormalized to sum to one on construction.
class KdeDensity {
 public:
  KdeDensity() = default;
  explicit KdeDensity(std::vector<GaussianKernel> kernels);

  double pdf(const Point2& p) const;
  Point2 draw(std::mt19937_64& rng) const;

  const std::vector<GaussianKernel>& kernels() const { return kernels_; }
  bool empty() const { return kernels_.empty(); }
  /// Same means and weights, bandwidths multiplied by `factor`.
  KdeDensity scaled_bandwidth(double factor) const;

  /// Truncation radius of pdf() in bandwidths; the neglected mass per
  /// kernel is below exp(-kCutoff^2 / 2) of its peak.
  static constexpr double kCutoff = 9.0;

  /// All elite points coincided and the bandwidth floor was applied.
  bool degenerate = false;

 private:
  std::vector<GaussianKernel> kernels_;
  std::vector<double> cumulative_;
  std::vector<double> norm_;  // weight / (2 pi hx hy)
  std::vector<Point2> inv_bw_;
  std::vector<std::size_t> by_x_;  // kernel indices sorted by mean x
  std::vector<double> sorted_x_;
  double reach_x_ = 0.0;
};

struct Elite {
  Point2 point;
  double weight;
  double source_cost;
};

struct EliteSet {
  std::vector<Elite> members;
  double threshold = 0.0;
};

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double q);

/// States of the solutions whose cost is at or below the q-quantile of all
/// solution costs, thinned by a common stride so at most `max_elites` remain.
/// Weights are proportional to exp(-cost / threshold) and sum to one.
EliteSet quantile_elites(const SolutionSet& solutions, double q,
                         std::size_t max_elites);

inline constexpr double kBandwidthFloor = 1e-3;

/// One kernel per elite with weighted Scott's-rule bandwidths, floored at
/// kBandwidthFloor. Throws std::invalid_argument for an empty elite set.
KdeDensity wgkde_fit(const EliteSet& elites);

/// Monte Carlo estimate of the L1 distance between two densities, drawing
/// `samples` points from their even mixture. Lies in [0, 2].
double l1_distance(const KdeDensity& a, const KdeDensity& b,
                   std::size_t samples, std::uint64_t seed,
                   std::size_t parallel_threshold);

bool convergence_check(const KdeDensity& previous, const KdeDensity& current,
                       double threshold, std::size_t samples = 10000,
                       std::uint64_t seed = 0x5eed,
                       std::size_t parallel_threshold = 0);

}  // namespace lqrcbf
