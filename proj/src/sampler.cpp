#include "lqrcbf/sampler.hpp"

#include <stdexcept>

namespace lqrcbf {

void SamplerConfig::validate() const {
  if (!box.lower.allFinite() || !box.upper.allFinite() ||
      !(box.lower.array() < box.upper.array()).all()) {
    throw std::invalid_argument("sampler.box must be finite and nonempty");
  }
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw std::invalid_argument("sampler.quantile must lie in (0, 1)");
  }
  if (update_period < 1) {
    throw std::invalid_argument("sampler.update_period must be >= 1");
  }
  if (max_elites < 1) throw std::invalid_argument("sampler.max_elites must be >= 1");
  if (!(mix_probability >= 0.0 && mix_probability <= 1.0)) {
    throw std::invalid_argument("sampler.mix_probability must lie in [0, 1]");
  }
  if (!(convergence_threshold > 0.0)) {
    throw std::invalid_argument("sampler.convergence_threshold must be > 0");
  }
  if (convergence_samples < 1 || max_rejections < 1) {
    throw std::invalid_argument("sampler: sample counts must be >= 1");
  }
}

Sampler::Sampler(SamplerConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.validate();
}

Point2 Sampler::uniform() {
  const Point2& lo = config_.box.lower;
  const Point2& hi = config_.box.upper;
  const double x = lo.x() + (hi.x() - lo.x()) * unit_(rng_);
  const double y = lo.y() + (hi.y() - lo.y()) * unit_(rng_);
  return {x, y};
}

Point2 Sampler::draw_in_box(const KdeDensity& density) {
  for (int attempt = 0; attempt < config_.max_rejections; ++attempt) {
    const Point2 p = density.draw(rng_);
    if (config_.box.contains(p)) return p;
  }
  last_source_ = SampleSource::kFallback;
  return uniform();
}

void Sampler::refit(const SolutionSet& solutions) {
  const EliteSet elites =
      quantile_elites(solutions, config_.quantile, config_.max_elites);
  for (const auto& e : elites.members) {
    if (e.source_cost > elites.threshold) {
      throw std::logic_error("sampler: elite above quantile threshold");
    }
  }
  KdeDensity fitted = wgkde_fit(elites);
  bool agrees = false;
  if (density_) {
    agrees = convergence_check(*density_, fitted, config_.convergence_threshold,
                               config_.convergence_samples,
                               0x5eedULL + snapshots_.size(),
                               config_.parallel_threshold);
  }
  if (agrees) {
    converged_ = true;
    converged_density_ = fitted;
  } else if (!config_.sticky_convergence) {
    converged_ = false;
  }
  DensitySnapshot snap{calls_, solutions.size(), converged_, fitted, {}};
  snap.elites.reserve(elites.members.size());
  for (const auto& e : elites.members) snap.elites.push_back(e.point);
  snapshots_.push_back(std::move(snap));
  density_ = std::move(fitted);
  fitted_for_ = solutions.size();
}

Point2 Sampler::sample(const SolutionSet& solutions) {
  ++calls_;
  const double coin = unit_(rng_);
  last_source_ = SampleSource::kUniform;
  if (!config_.adaptive || coin > config_.mix_probability || solutions.empty()) {
    return uniform();
  }
  const bool on_period = solutions.size() % config_.update_period == 0;
  if (converged_ && (config_.sticky_convergence || !on_period)) {
    last_source_ = SampleSource::kConvergedDensity;
    return draw_in_box(*converged_density_);
  }
  if (on_period) {
    if (fitted_for_ != solutions.size() || !density_) refit(solutions);
    last_source_ = SampleSource::kDensity;
    return draw_in_box(*density_);
  }
  return uniform();
}

}  // namespace lqrcbf
