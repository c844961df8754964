#include "lqrcbf/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lqrcbf/kernels/kde_eval.hpp"

namespace lqrcbf {

KdeDensity::KdeDensity(std::vector<GaussianKernel> kernels)
    : kernels_(std::move(kernels)) {
  double total = 0.0;
  for (const auto& k : kernels_) {
    if (!(k.weight > 0.0) || !std::isfinite(k.weight)) {
      throw std::invalid_argument("KdeDensity: kernel weights must be positive");
    }
    if (!(k.bandwidth.array() > 0.0).all() || !k.bandwidth.allFinite()) {
      throw std::invalid_argument("KdeDensity: bandwidths must be positive");
    }
    if (!k.mean.allFinite()) {
      throw std::invalid_argument("KdeDensity: kernel mean must be finite");
    }
    total += k.weight;
  }
  cumulative_.reserve(kernels_.size());
  norm_.reserve(kernels_.size());
  inv_bw_.reserve(kernels_.size());
  double running = 0.0;
  for (auto& k : kernels_) {
    k.weight /= total;
    running += k.weight;
    cumulative_.push_back(running);
    norm_.push_back(k.weight /
                    (2.0 * std::numbers::pi * k.bandwidth.x() * k.bandwidth.y()));
    inv_bw_.push_back(k.bandwidth.cwiseInverse());
    reach_x_ = std::max(reach_x_, kCutoff * k.bandwidth.x());
  }
  by_x_.resize(kernels_.size());
  for (std::size_t i = 0; i < by_x_.size(); ++i) by_x_[i] = i;
  std::stable_sort(by_x_.begin(), by_x_.end(), [&](std::size_t a, std::size_t b) {
    return kernels_[a].mean.x() < kernels_[b].mean.x();
  });
  sorted_x_.reserve(by_x_.size());
  for (const std::size_t i : by_x_) sorted_x_.push_back(kernels_[i].mean.x());
}

double KdeDensity::pdf(const Point2& p) const {
  // Kernels further than kCutoff bandwidths along either axis contribute
  // less than exp(-kCutoff^2 / 2) of their peak and are skipped.
  const auto lo = std::lower_bound(sorted_x_.begin(), sorted_x_.end(),
                                   p.x() - reach_x_);
  const auto hi = std::upper_bound(lo, sorted_x_.end(), p.x() + reach_x_);
  double value = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const std::size_t i = by_x_[static_cast<std::size_t>(it - sorted_x_.begin())];
    const double zx = (p.x() - kernels_[i].mean.x()) * inv_bw_[i].x();
    const double zy = (p.y() - kernels_[i].mean.y()) * inv_bw_[i].y();
    if (std::abs(zx) > kCutoff || std::abs(zy) > kCutoff) continue;
    value += norm_[i] * std::exp(-0.5 * (zx * zx + zy * zy));
  }
  return value;
}

Point2 KdeDensity::draw(std::mt19937_64& rng) const {
  if (kernels_.empty()) throw std::logic_error("KdeDensity: draw from empty");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  const auto& k = kernels_[static_cast<std::size_t>(it - cumulative_.begin())];
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double gx = gauss(rng);
  const double gy = gauss(rng);
  return {k.mean.x() + k.bandwidth.x() * gx, k.mean.y() + k.bandwidth.y() * gy};
}

KdeDensity KdeDensity::scaled_bandwidth(double factor) const {
  std::vector<GaussianKernel> scaled = kernels_;
  for (auto& k : scaled) k.bandwidth *= factor;
  KdeDensity out(std::move(scaled));
  out.degenerate = degenerate;
  return out;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EliteSet quantile_elites(const SolutionSet& solutions, double q,
                         std::size_t max_elites) {
  if (solutions.empty()) throw std::invalid_argument("quantile_elites: no solutions");
  if (max_elites == 0) throw std::invalid_argument("quantile_elites: cap is zero");
  std::vector<double> costs;
  costs.reserve(solutions.size());
  for (const auto& s : solutions) costs.push_back(s.cost);

  EliteSet elites;
  elites.threshold = empirical_quantile(costs, q);

  std::size_t total_points = 0;
  for (const auto& s : solutions) {
    if (s.cost <= elites.threshold) total_points += s.waypoints.size();
  }
  const std::size_t stride =
      std::max<std::size_t>(1, (total_points + max_elites - 1) / max_elites);

  std::size_t counter = 0;
  double weight_sum = 0.0;
  for (const auto& s : solutions) {
    if (s.cost > elites.threshold) continue;
    const double w = elites.threshold > 0.0
                         ? std::exp(-s.cost / elites.threshold)
                         : 1.0;
    for (const auto& p : s.waypoints) {
      if (counter++ % stride != 0) continue;
      elites.members.push_back({p, w, s.cost});
      weight_sum += w;
    }
  }
  for (auto& e : elites.members) e.weight /= weight_sum;
  return elites;
}

KdeDensity wgkde_fit(const EliteSet& elites) {
  if (elites.members.empty()) {
    throw std::invalid_argument("wgkde_fit: empty elite set");
  }
  double wsum = 0.0;
  double w2sum = 0.0;
  Point2 mean = Point2::Zero();
  for (const auto& e : elites.members) {
    wsum += e.weight;
    w2sum += e.weight * e.weight;
    mean += e.weight * e.point;
  }
  mean /= wsum;
  Point2 var = Point2::Zero();
  for (const auto& e : elites.members) {
    var += e.weight * (e.point - mean).cwiseAbs2();
  }
  var /= wsum;
  // Kish effective sample size of the weighted sample, d = 2.
  const double n_eff = wsum * wsum / w2sum;
  const double scott = std::pow(n_eff, -1.0 / 6.0);
  Point2 bandwidth = var.cwiseSqrt() * scott;
  const bool degenerate = (bandwidth.array() < kBandwidthFloor).all();
  bandwidth = bandwidth.cwiseMax(kBandwidthFloor);

  std::vector<GaussianKernel> kernels;
  kernels.reserve(elites.members.size());
  for (const auto& e : elites.members) {
    kernels.push_back({e.point, e.weight, bandwidth});
  }
  KdeDensity density(std::move(kernels));
  density.degenerate = degenerate;
  return density;
}

double l1_distance(const KdeDensity& a, const KdeDensity& b,
                   std::size_t samples, std::uint64_t seed,
                   std::size_t parallel_threshold) {
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 2.0;
  if (samples == 0) throw std::invalid_argument("l1_distance: zero samples");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<Point2> points;
  points.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    points.push_back(coin(rng) ? a.draw(rng) : b.draw(rng));
  }
  std::vector<double> pa(samples), pb(samples);
  kernels::pdf_batch(a, points, pa, parallel_threshold);
  kernels::pdf_batch(b, points, pb, parallel_threshold);
  double total = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double mix = 0.5 * (pa[i] + pb[i]);
    if (mix > 0.0) total += std::abs(pa[i] - pb[i]) / mix;
  }
  return total / static_cast<double>(samples);
}

bool convergence_check(const KdeDensity& previous, const KdeDensity& current,
                       double threshold, std::size_t samples,
                       std::uint64_t seed, std::size_t parallel_threshold) {
  return l1_distance(previous, current, samples, seed, parallel_threshold) <
         threshold;
}

}  // namespace lqrcbf
