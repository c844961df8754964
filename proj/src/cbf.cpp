#include "lqrcbf/cbf.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lqrcbf {

ObstacleSpec::ObstacleSpec(Point2 c, double r) : center(std::move(c)), radius(r) {
  if (!center.allFinite()) {
    throw std::invalid_argument("obstacle center must be finite");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("obstacle radius must be positive");
  }
}

CbfParams::CbfParams(double k1_, double k2_, ZetaForm form_)
    : k1(k1_), k2(k2_), form(form_) {
  if (!(k1 > 0.0) || !(k2 > 0.0) || !std::isfinite(k1) || !std::isfinite(k2)) {
    throw std::invalid_argument("CBF gains k1, k2 must be positive");
  }
}

double h_value(const ObstacleSpec& obs, const Point2& p) {
  return (p - obs.center).squaredNorm() - obs.radius * obs.radius;
}

double h_value(const ObstacleSpec& obs, const State& x,
               const DynamicsModel& model) {
  return h_value(obs, model.workspace(x));
}

double min_h(std::span<const ObstacleSpec> obstacles, const State& x,
             const DynamicsModel& model) {
  double lowest = std::numeric_limits<double>::infinity();
  const Point2 p = model.workspace(x);
  for (const auto& obs : obstacles) lowest = std::min(lowest, h_value(obs, p));
  return lowest;
}

std::vector<double> psi_chain(std::span<const double> derivatives,
                              std::span<const double> gains) {
  const std::size_t degree = gains.size();
  if (degree < 1 || degree > 2) {
    throw UnsupportedRelativeDegree("psi_chain: relative degree " +
                                    std::to_string(degree) +
                                    " is not supported");
  }
  if (derivatives.size() != degree + 1) {
    throw std::invalid_argument("psi_chain: need h and its first r derivatives");
  }
  // Psi_k = d/dt Psi_{k-1} + a_k Psi_{k-1}. Each Psi_k is kept as its
  // expansion in h, hdot, ...; differentiating shifts the coefficients.
  std::vector<double> coeffs{1.0};  // Psi_0 = h
  std::vector<double> psi;
  auto evaluate = [&](const std::vector<double>& c) {
    double v = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) v += c[i] * derivatives[i];
    return v;
  };
  psi.push_back(evaluate(coeffs));
  for (std::size_t k = 0; k < degree; ++k) {
    std::vector<double> next(coeffs.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i + 1] += coeffs[i];
      next[i] += gains[k] * coeffs[i];
    }
    coeffs = std::move(next);
    psi.push_back(evaluate(coeffs));
  }
  return psi;
}

double zeta_double_integrator(const ObstacleSpec& obs, const CbfParams& params,
                              const State& x, const Control& u) {
  const double dx = x[0] - obs.center.x();
  const double dy = x[2] - obs.center.y();
  const double h = dx * dx + dy * dy - obs.radius * obs.radius;
  return 2.0 * x[1] * x[1] + 2.0 * x[3] * x[3] + 2.0 * dx * u[0] +
         2.0 * dy * u[1] + params.k1 * h +
         2.0 * params.k2 * (dx * x[1] + dy * x[3]);
}

double lie_f_h_unicycle(const ObstacleSpec& obs, const State& x, double v) {
  const double dx = x[0] - obs.center.x();
  const double dy = x[1] - obs.center.y();
  return 2.0 * v * dx * std::cos(x[2]) + 2.0 * v * dy * std::sin(x[2]);
}

double zeta_unicycle(const ObstacleSpec& obs, const CbfParams& params,
                     const State& x, const Control& u) {
  const double v = u[0];
  const double omega = u[1];
  const double c = std::cos(x[2]);
  const double s = std::sin(x[2]);
  const double dx = x[0] - obs.center.x();
  const double dy = x[1] - obs.center.y();
  const double h = dx * dx + dy * dy - obs.radius * obs.radius;
  const double lead = params.form == ZetaForm::kUnicyclePrinted
                          ? 2.0 * x[0] * v * v * c * c + 2.0 * x[1] * v * v * s * s
                          : 2.0 * v * v * (c * c + s * s);
  const double bracket = 2.0 * dy * v * c - 2.0 * dx * v * s;
  const double lfh = 2.0 * v * dx * c + 2.0 * v * dy * s;
  return lead + bracket * omega + params.k1 * h + params.k2 * lfh;
}

double zeta(const ObstacleSpec& obs, const CbfParams& params, const State& x,
            const Control& u) {
  if (params.form == ZetaForm::kDoubleIntegrator) {
    return zeta_double_integrator(obs, params, x, u);
  }
  return zeta_unicycle(obs, params, x, u);
}

CbfVerdict check_constraints(std::span<const ObstacleSpec> obstacles,
                             const CbfParams& params, const State& x,
                             const Control& u) {
  CbfVerdict verdict;
  verdict.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const double z = zeta(obstacles[i], params, x, u);
    if (std::isnan(z)) {
      verdict.margin = z;
      verdict.violating_index = i;
      break;
    }
    if (z < verdict.margin) {
      verdict.margin = z;
      verdict.violating_index = i;
    }
  }
  verdict.satisfied = verdict.margin >= 0.0;
  if (verdict.satisfied) verdict.violating_index.reset();
  return verdict;
}

}  // namespace lqrcbf
