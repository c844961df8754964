#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/types.hpp"

namespace lqrcbf {

/// Raised when the Riccati iteration cannot produce a stabilizing solution
/// within budget (unstabilizable pair, or weights too ill-conditioned).
class NonConvergent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// xdot = A x + B u. Checked on construction: A square, rows(B) == rows(A),
/// all entries finite.
struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b);
  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
};

/// Quadratic weights. Q must be symmetric PSD and R symmetric positive
/// definite; both are checked on construction.
struct CostWeights {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;

  CostWeights(Eigen::MatrixXd q, Eigen::MatrixXd r);
  static CostWeights identity(int n, int m);
};

struct RiccatiSolution {
  Eigen::MatrixXd P;  // cost-to-go, n x n
  Eigen::MatrixXd K;  // feedback gain, m x n
};

/// Solves A^T X + X A + C = 0 by complex Bartels-Stewart. Requires
/// lambda_i(A) + conj(lambda_j(A)) != 0 for all i, j; throws NonConvergent
/// otherwise.
Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& A,
                                          const Eigen::MatrixXd& C);

/// Frobenius norm of A^T P + P A - P B R^-1 B^T P + Q.
double care_residual(const LinearModel& model, const CostWeights& weights,
                     const Eigen::MatrixXd& P);

/// Largest real part among the eigenvalues of `M`.
double spectral_abscissa(const Eigen::MatrixXd& M);

/// Stabilizing solution of the continuous algebraic Riccati equation and the
/// gain K = R^-1 B^T P.
///
/// Newton-Kleinman iteration from an initial stabilizing gain: zero when A is
/// already Hurwitz, otherwise a Bass shift, otherwise (n <= 8) the stable
/// invariant subspace of the Hamiltonian. The result is accepted only if the
/// residual is at most 1e-8 (1 + ||Q||_F) and A - BK is Hurwitz.
RiccatiSolution solve_care(const LinearModel& model,
                           const CostWeights& weights);

/// Jacobians of `dynamics` at (x_eq, u_eq).
LinearModel linearize(const DynamicsModel& dynamics, const State& x_eq,
                      const Control& u_eq);

/// u = -K (x - x_ref). Angular coordinates use the model's wrapped
/// difference when a model is supplied.
Control lqr_policy(const Eigen::MatrixXd& K, const State& x, const State& x_ref);
Control lqr_policy(const RiccatiSolution& sol, const State& x,
                   const State& x_ref);
Control lqr_policy(const DynamicsModel& model, const RiccatiSolution& sol,
                   const State& x, const State& x_ref);

/// Hash table of gains keyed by the quantized local goal.
///
/// Gains are always computed at the quantized goal itself, so a lookup and
/// a fresh computation for the same key agree bit for bit. Linear models
/// share a single entry. With caching disabled every request re-solves.
class GainCache {
 public:
  using Key = std::vector<std::int64_t>;

  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  explicit GainCache(bool enabled = true, double grid = 1e-6);

  bool enabled() const { return enabled_; }
  double grid() const { return grid_; }

  Key key_for(const DynamicsModel& model, const State& goal) const;
  /// The representative state of `key` (grid point) for nonlinear models.
  State key_state(const Key& key) const;

  const RiccatiSolution* find(const Key& key) const;
  const RiccatiSolution& insert(const Key& key, RiccatiSolution sol);

  std::size_t size() const { return table_.size(); }
  std::size_t solver_invocations() const { return solves_; }
  std::size_t hits() const { return hits_; }

 private:
  friend const RiccatiSolution& gain_for_goal(GainCache&, const DynamicsModel&,
                                              const CostWeights&, const State&);

  bool enabled_;
  double grid_;
  std::unordered_map<Key, RiccatiSolution, KeyHash> table_;
  RiccatiSolution scratch_;
  std::size_t solves_ = 0;
  std::size_t hits_ = 0;
};

/// Linearizes at the local goal (with the model's nominal control) and solves
/// the CARE, consulting `cache` first. The returned reference is valid until
/// the next call on the same cache.
const RiccatiSolution& gain_for_goal(GainCache& cache,
                                     const DynamicsModel& dynamics,
                                     const CostWeights& weights,
                                     const State& x_goal_local);

}  // namespace lqrcbf
