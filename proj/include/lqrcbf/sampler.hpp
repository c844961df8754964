#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "lqrcbf/kde.hpp"

namespace lqrcbf {

struct SamplerConfig {
  Box2 box{{0.0, 0.0}, {50.0, 30.0}};
  double quantile = 0.25;             // rho
  std::size_t update_period = 5;      // n_v
  std::size_t max_elites = 300;       // m
  double mix_probability = 0.5;
  double convergence_threshold = 0.05;
  std::size_t convergence_samples = 10000;
  bool sticky_convergence = true;
  int max_rejections = 100;
  bool adaptive = true;
  std::size_t parallel_threshold = 4096;

  void validate() const;
};

enum class SampleSource {
  kUniform,
  kDensity,           // freshly fitted SDF
  kConvergedDensity,  // SDF after the convergence flag was raised
  kFallback,          // density draws kept leaving the box
};

/// A fitted sampling density plus the elites it was fitted to.
struct DensitySnapshot {
  std::size_t call_index;     // sample() call that triggered the fit
  std::size_t solutions;      // |G| at fit time
  bool converged;
  KdeDensity density;
  std::vector<Point2> elites;
};

/// Uniform / cross-entropy importance sampler over the workspace box.
///
/// A fair coin decides between the box and the current sampling density.
/// The density is refitted to the cost-quantile elites of the solution set
/// whenever |G| reaches a multiple of n_v; once two successive fits agree in
/// L1 below the threshold the converged density is used from then on.
class Sampler {
 public:
  Sampler(SamplerConfig config, std::uint64_t seed);

  Point2 sample(const SolutionSet& solutions);

  SampleSource last_source() const { return last_source_; }
  bool converged() const { return converged_; }
  const std::optional<KdeDensity>& density() const { return density_; }
  const std::vector<DensitySnapshot>& snapshots() const { return snapshots_; }
  const SamplerConfig& config() const { return config_; }
  std::size_t calls() const { return calls_; }

  Point2 uniform();

 private:
  Point2 draw_in_box(const KdeDensity& density);
  void refit(const SolutionSet& solutions);

  SamplerConfig config_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::optional<KdeDensity> density_;
  std::optional<KdeDensity> converged_density_;
  bool converged_ = false;
  std::size_t fitted_for_ = 0;
  std::size_t calls_ = 0;
  SampleSource last_source_ = SampleSource::kUniform;
  std::vector<DensitySnapshot> snapshots_;
};

}  // namespace lqrcbf
