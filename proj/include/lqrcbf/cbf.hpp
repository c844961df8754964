#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/types.hpp"

namespace lqrcbf {

/// Circular obstacle in the workspace plane.
struct ObstacleSpec {
  Point2 center;
  double radius;

  ObstacleSpec(Point2 c, double r);
};

/// Which closed-form second-order constraint to evaluate.
enum class ZetaForm {
  kDoubleIntegrator,
  kUnicycleDerived,  // leading term 2 v^2, consistent with hddot
  kUnicyclePrinted,  // leading term 2 x1 v^2 cos^2 + 2 x2 v^2 sin^2
};

/// Linear class-K coefficients: k1 multiplies h, k2 multiplies hdot.
struct CbfParams {
  double k1;
  double k2;
  ZetaForm form;

  CbfParams(double k1_, double k2_, ZetaForm form_);
};

struct CbfVerdict {
  bool satisfied = true;
  std::optional<std::size_t> violating_index;
  double margin;  // min_i zeta_i, +inf with no obstacles
};

class UnsupportedRelativeDegree : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Squared workspace distance to the center minus radius squared.
double h_value(const ObstacleSpec& obs, const Point2& p);
double h_value(const ObstacleSpec& obs, const State& x,
               const DynamicsModel& model);

/// Smallest h over all obstacles; +inf for an empty list.
double min_h(std::span<const ObstacleSpec> obstacles, const State& x,
             const DynamicsModel& model);

/// HOCBF recursion with linear class-K functions alpha_k(s) = gains[k-1] s.
///
/// `derivatives` holds [h, hdot, ..., h^(r)] along the dynamics and `gains`
/// the r coefficients; returns [Psi_0, ..., Psi_r]. Relative degree r must
/// be 1 or 2.
std::vector<double> psi_chain(std::span<const double> derivatives,
                              std::span<const double> gains);

double zeta_double_integrator(const ObstacleSpec& obs, const CbfParams& params,
                              const State& x, const Control& u);

/// Unicycle constraint for control [v, omega]. `params.form` picks the
/// leading term; both forms share the omega bracket and k1 h + k2 L_f h.
double zeta_unicycle(const ObstacleSpec& obs, const CbfParams& params,
                     const State& x, const Control& u);

/// Lie derivative of h along the unicycle drift at speed v.
double lie_f_h_unicycle(const ObstacleSpec& obs, const State& x, double v);

double zeta(const ObstacleSpec& obs, const CbfParams& params, const State& x,
            const Control& u);

/// zeta_i(x, u) >= 0 for every obstacle.
CbfVerdict check_constraints(std::span<const ObstacleSpec> obstacles,
                             const CbfParams& params, const State& x,
                             const Control& u);

}  // namespace lqrcbf
