#include "lqrcbf/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

namespace lqrcbf {
namespace {

using Eigen::MatrixXd;
using Eigen::MatrixXcd;

constexpr int kMaxNewtonIterations = 60;
constexpr int kHamiltonianMaxStates = 8;

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

bool is_hurwitz(const MatrixXd& m) { return spectral_abscissa(m) < 0.0; }

// Gain from the Bass shift: with (A + bI) Z + Z (A + bI)^T = 2 B B^T and b
// larger than every |Re lambda(A)|, K = B^T Z^-1 places A - BK in the open
// left half plane whenever (A, B) is controllable.
std::optional<MatrixXd> bass_gain(const MatrixXd& A, const MatrixXd& B) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<MatrixXd> es(A, false);
  const double beta = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
  const MatrixXd shifted = -(A + beta * MatrixXd::Identity(n, n)).transpose();
  MatrixXd Z;
  try {
    Z = solve_continuous_lyapunov(shifted, -2.0 * B * B.transpose());
  } catch (const NonConvergent&) {
    return std::nullopt;
  }
  Z = symmetrize(Z);
  // Z is positive definite in exact arithmetic but can be so badly conditioned
  // that LLT gives up; the Hurwitz check below is what actually matters.
  Eigen::LLT<MatrixXd> llt(Z);
  MatrixXd K = llt.info() == Eigen::Success
                   ? MatrixXd(llt.solve(B).transpose())
                   : MatrixXd(Z.fullPivLu().solve(B).transpose());
  if (!all_finite(K) || !is_hurwitz(A - B * K)) return std::nullopt;
  return K;
}

// Stable invariant subspace [U1; U2] of the Hamiltonian, P = U2 U1^-1.
std::optional<MatrixXd> hamiltonian_solution(const LinearModel& model,
                                             const CostWeights& w) {
  const Eigen::Index n = model.states();
  const MatrixXd& A = model.A;
  const MatrixXd& B = model.B;
  const MatrixXd S = B * w.R.llt().solve(B.transpose());
  MatrixXd H(2 * n, 2 * n);
  H << A, -S, -w.Q, -A.transpose();
  Eigen::EigenSolver<MatrixXd> es(H, true);
  if (es.info() != Eigen::Success) return std::nullopt;

  MatrixXcd basis(2 * n, n);
  Eigen::Index cols = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()[i].real() < 0.0) {
      if (cols == n) return std::nullopt;
      basis.col(cols++) = es.eigenvectors().col(i);
    }
  }
  if (cols != n) return std::nullopt;
  const MatrixXcd U1 = basis.topRows(n);
  const MatrixXcd U2 = basis.bottomRows(n);
  Eigen::PartialPivLU<MatrixXcd> lu(U1);
  if (std::abs(lu.determinant()) < 1e-14) return std::nullopt;
  MatrixXd P = (U2 * lu.inverse()).real();
  P = symmetrize(P);
  if (!all_finite(P)) return std::nullopt;
  return P;
}

}  // namespace

LinearModel::LinearModel(MatrixXd a, MatrixXd b)
    : A(std::move(a)), B(std::move(b)) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("LinearModel: A must be square");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument("LinearModel: B must have as many rows as A");
  }
  if (!all_finite(A) || !all_finite(B)) {
    throw std::invalid_argument("LinearModel: non-finite entry");
  }
}

CostWeights::CostWeights(MatrixXd q, MatrixXd r)
    : Q(std::move(q)), R(std::move(r)) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols()) {
    throw std::invalid_argument("CostWeights: Q and R must be square");
  }
  if (!all_finite(Q) || !all_finite(R)) {
    throw std::invalid_argument("CostWeights: non-finite entry");
  }
  const double q_tol = 1e-10 * (1.0 + Q.cwiseAbs().maxCoeff());
  const double r_tol = 1e-10 * (1.0 + R.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > q_tol) {
    throw std::invalid_argument("CostWeights: Q must be symmetric");
  }
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > r_tol) {
    throw std::invalid_argument("CostWeights: R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> qe(Q, Eigen::EigenvaluesOnly);
  if (Q.size() > 0 && qe.eigenvalues().minCoeff() < -q_tol) {
    throw std::invalid_argument("CostWeights: Q must be positive semidefinite");
  }
  Eigen::LLT<MatrixXd> llt(R);
  if (R.size() == 0 || llt.info() != Eigen::Success) {
    throw std::invalid_argument("CostWeights: R must be positive definite");
  }
}

CostWeights CostWeights::identity(int n, int m) {
  return {MatrixXd::Identity(n, n), MatrixXd::Identity(m, m)};
}

MatrixXd solve_continuous_lyapunov(const MatrixXd& A, const MatrixXd& C) {
  using Complex = std::complex<double>;
  const Eigen::Index n = A.rows();
  Eigen::ComplexSchur<MatrixXcd> schur(A.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw NonConvergent("lyapunov: Schur decomposition failed");
  }
  const MatrixXcd& T = schur.matrixT();
  const MatrixXcd& U = schur.matrixU();
  // A = U T U^H turns A^T X + X A = -C into T^H Y + Y T = -F with
  // Y = U^H X U and F = U^H C U; T^H is lower triangular so Y is found
  // entry by entry in column-major order.
  const MatrixXcd F = U.adjoint() * C.cast<Complex>() * U;
  MatrixXcd Y = MatrixXcd::Zero(n, n);
  const double scale = 1.0 + T.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex rhs = -F(i, j);
      for (Eigen::Index k = 0; k < i; ++k) rhs -= std::conj(T(k, i)) * Y(k, j);
      for (Eigen::Index k = 0; k < j; ++k) rhs -= Y(i, k) * T(k, j);
      const Complex denom = std::conj(T(i, i)) + T(j, j);
      if (std::abs(denom) <= 1e-13 * scale) {
        throw NonConvergent("lyapunov: operator is singular");
      }
      Y(i, j) = rhs / denom;
    }
  }
  MatrixXd X = (U * Y * U.adjoint()).real();
  if (!all_finite(X)) throw NonConvergent("lyapunov: non-finite solution");
  return X;
}

double care_residual(const LinearModel& model, const CostWeights& weights,
                     const MatrixXd& P) {
  const MatrixXd& A = model.A;
  const MatrixXd& B = model.B;
  const MatrixXd BtP = B.transpose() * P;
  const MatrixXd res = A.transpose() * P + P * A -
                       BtP.transpose() * weights.R.llt().solve(BtP) +
                       weights.Q;
  return res.norm();
}

double spectral_abscissa(const MatrixXd& M) {
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

RiccatiSolution solve_care(const LinearModel& model,
                           const CostWeights& weights) {
  const MatrixXd& A = model.A;
  const MatrixXd& B = model.B;
  const Eigen::Index n = model.states();
  const Eigen::Index m = model.inputs();
  if (weights.Q.rows() != n || weights.R.rows() != m) {
    throw std::invalid_argument("solve_care: weight dimensions do not match");
  }
  const Eigen::LLT<MatrixXd> r_llt(weights.R);
  const double tolerance = 1e-8 * (1.0 + weights.Q.norm());

  auto gain_from = [&](const MatrixXd& P) -> MatrixXd {
    return r_llt.solve(B.transpose() * P);
  };

  MatrixXd K;
  if (is_hurwitz(A)) {
    K = MatrixXd::Zero(m, n);
  } else if (auto bass = bass_gain(A, B)) {
    K = *bass;
  } else if (n <= kHamiltonianMaxStates) {
    auto P0 = hamiltonian_solution(model, weights);
    if (!P0) throw NonConvergent("solve_care: no stabilizing initial gain");
    K = gain_from(*P0);
    if (!is_hurwitz(A - B * K)) {
      throw NonConvergent("solve_care: (A, B) appears unstabilizable");
    }
  } else {
    throw NonConvergent("solve_care: no stabilizing initial gain");
  }

  MatrixXd P;
  double previous = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const MatrixXd closed = A - B * K;
    const MatrixXd rhs = weights.Q + K.transpose() * weights.R * K;
    P = symmetrize(solve_continuous_lyapunov(closed, rhs));
    K = gain_from(P);
    const double res = care_residual(model, weights, P);
    if (!std::isfinite(res)) break;
    if (res <= tolerance) {
      // One more step tightens the residual to round-off level for free.
      if (res <= 1e-3 * tolerance || it + 1 == kMaxNewtonIterations) break;
    }
    // Far from the solution the residual can grow for a few steps before the
    // quadratic phase; only a plateau near tolerance counts as stalling.
    const bool plateau = res >= 0.5 * previous && res <= 1e3 * tolerance;
    stalled = plateau ? stalled + 1 : 0;
    if (stalled >= 5) break;
    previous = res;
  }

  RiccatiSolution sol{symmetrize(P), MatrixXd()};
  sol.K = gain_from(sol.P);
  const double residual = care_residual(model, weights, sol.P);
  if (!all_finite(sol.P) || !(residual <= tolerance)) {
    throw NonConvergent("solve_care: residual " + std::to_string(residual) +
                        " above tolerance " + std::to_string(tolerance));
  }
  if (!is_hurwitz(A - B * sol.K)) {
    throw NonConvergent("solve_care: closed loop is not Hurwitz");
  }
  return sol;
}

LinearModel linearize(const DynamicsModel& dynamics, const State& x_eq,
                      const Control& u_eq) {
  const Matrix a = dynamics.state_jacobian(x_eq, u_eq);
  const Matrix b = dynamics.control_jacobian(x_eq, u_eq);
  return {MatrixXd(a), MatrixXd(b)};
}

Control lqr_policy(const MatrixXd& K, const State& x, const State& x_ref) {
  const State e = x - x_ref;
  Control u = Control::Zero(K.rows());
  u.noalias() -= K * e;
  return u;
}

Control lqr_policy(const RiccatiSolution& sol, const State& x,
                   const State& x_ref) {
  return lqr_policy(sol.K, x, x_ref);
}

Control lqr_policy(const DynamicsModel& model, const RiccatiSolution& sol,
                   const State& x, const State& x_ref) {
  const State e = model.difference(x, x_ref);
  Control u = Control::Zero(sol.K.rows());
  u.noalias() -= sol.K * e;
  return u;
}

// ---------------------------------------------------------------------------
// GainCache

std::size_t GainCache::KeyHash::operator()(const Key& key) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL ^ key.size();
  for (const auto v : key) {
    h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
  }
  return h;
}

GainCache::GainCache(bool enabled, double grid)
    : enabled_(enabled), grid_(grid) {
  if (!(grid > 0.0)) throw std::invalid_argument("GainCache: grid must be > 0");
}

GainCache::Key GainCache::key_for(const DynamicsModel& model,
                                  const State& goal) const {
  if (model.is_linear()) return {};
  const State canonical = model.normalize(goal);
  Key key(static_cast<std::size_t>(canonical.size()));
  for (Eigen::Index i = 0; i < canonical.size(); ++i) {
    key[static_cast<std::size_t>(i)] =
        static_cast<std::int64_t>(std::llround(canonical[i] / grid_));
  }
  return key;
}

State GainCache::key_state(const Key& key) const {
  State x(static_cast<Eigen::Index>(key.size()));
  for (std::size_t i = 0; i < key.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = static_cast<double>(key[i]) * grid_;
  }
  return x;
}

const RiccatiSolution* GainCache::find(const Key& key) const {
  const auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

const RiccatiSolution& GainCache::insert(const Key& key, RiccatiSolution sol) {
  return table_.insert_or_assign(key, std::move(sol)).first->second;
}

const RiccatiSolution& gain_for_goal(GainCache& cache,
                                     const DynamicsModel& dynamics,
                                     const CostWeights& weights,
                                     const State& x_goal_local) {
  const GainCache::Key key = cache.key_for(dynamics, x_goal_local);
  if (cache.enabled_) {
    if (const RiccatiSolution* hit = cache.find(key)) {
      ++cache.hits_;
      return *hit;
    }
  }
  const State x_eq = key.empty() ? x_goal_local : cache.key_state(key);
  RiccatiSolution sol = solve_care(
      linearize(dynamics, x_eq, dynamics.nominal_control()), weights);
  ++cache.solves_;
  if (cache.enabled_) return cache.insert(key, std::move(sol));
  cache.scratch_ = std::move(sol);
  return cache.scratch_;
}

}  // namespace lqrcbf
