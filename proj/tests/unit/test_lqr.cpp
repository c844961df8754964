#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/lqr.hpp"

using namespace lqrcbf;
using Eigen::MatrixXd;

namespace {

// Stabilizing CARE solution from the stable invariant subspace of the
// Hamiltonian; independent of the library's Newton iteration.
MatrixXd hamiltonian_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                          const MatrixXd& R) {
  const Eigen::Index n = A.rows();
  MatrixXd H(2 * n, 2 * n);
  H << A, -B * R.inverse() * B.transpose(), -Q, -A.transpose();
  Eigen::ComplexEigenSolver<MatrixXd> es(H);
  Eigen::MatrixXcd U(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()[i].real() < 0.0) U.col(k++) = es.eigenvectors().col(i);
  }
  EXPECT_EQ(k, n);
  const Eigen::MatrixXcd P = U.bottomRows(n) * U.topRows(n).inverse();
  return P.real();
}

MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                       double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = g(rng);
  }
  return M;
}

}  // namespace

TEST(Care, ScalarIntegrator) {
  const auto sol = solve_care(LinearModel(MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1)),
                              CostWeights::identity(1, 1));
  EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(sol.K(0, 0), 1.0, 1e-12);
}

TEST(Care, DoubleIntegrator1D) {
  MatrixXd A(2, 2);
  A << 0, 1, 0, 0;
  MatrixXd B(2, 1);
  B << 0, 1;
  const auto start = std::chrono::steady_clock::now();
  const auto sol = solve_care(LinearModel(A, B), CostWeights::identity(2, 1));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double s3 = std::sqrt(3.0);
  EXPECT_NEAR(sol.K(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(sol.K(0, 1), s3, 1e-6);
  EXPECT_NEAR(sol.P(0, 0), s3, 1e-9);
  EXPECT_NEAR(sol.P(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(sol.P(1, 1), s3, 1e-9);
  EXPECT_LT(secs, 1.0);
}

TEST(Care, StableWithZeroInput) {
  const auto sol = solve_care(
      LinearModel(MatrixXd::Constant(1, 1, -1.0), MatrixXd::Zero(1, 1)),
      CostWeights::identity(1, 1));
  EXPECT_NEAR(sol.P(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-12);
}

TEST(Care, ScalarClosedForm) {
  // a p + p a - p^2 / r + q = 0  =>  p = r (a + sqrt(a^2 + q / r))
  for (double a : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    for (double q : {0.5, 1.0, 4.0}) {
      for (double r : {0.25, 1.0, 2.0}) {
        const auto sol = solve_care(
            LinearModel(MatrixXd::Constant(1, 1, a), MatrixXd::Ones(1, 1)),
            CostWeights(MatrixXd::Constant(1, 1, q), MatrixXd::Constant(1, 1, r)));
        const double p = r * (a + std::sqrt(a * a + q / r));
        EXPECT_NEAR(sol.P(0, 0), p, 1e-9 * (1 + p)) << a << ' ' << q << ' ' << r;
      }
    }
  }
}

TEST(Care, RandomSystemsMatchHamiltonianOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 6);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    const MatrixXd A = random_matrix(rng, n, n);
    const MatrixXd B = random_matrix(rng, n, m);
    const MatrixXd L = random_matrix(rng, n, n);
    const MatrixXd Q = L * L.transpose() + 1e-3 * MatrixXd::Identity(n, n);
    const MatrixXd M = random_matrix(rng, m, m);
    const MatrixXd R = M * M.transpose() + 0.1 * MatrixXd::Identity(m, m);
    // Random B is controllable with probability one.
    const LinearModel model(A, B);
    const CostWeights w(Q, R);
    const auto sol = solve_care(model, w);
    EXPECT_LE(care_residual(model, w, sol.P), 1e-8 * (1 + Q.norm())) << trial;
    EXPECT_LT(spectral_abscissa(A - B * sol.K), 0.0) << trial;
    EXPECT_LE((sol.P - sol.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sol.P);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9 * (1 + sol.P.norm()));
    const MatrixXd oracle = hamiltonian_care(A, B, Q, R);
    EXPECT_LE((sol.P - oracle).norm(), 1e-6 * (1 + oracle.norm())) << trial;
    EXPECT_LE((sol.K - R.inverse() * B.transpose() * sol.P).norm(), 1e-12 * (1 + sol.K.norm()));
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(Care, UnstabilizableThrows) {
  MatrixXd A(2, 2);
  A << 1, 0, 0, 2;
  MatrixXd B(2, 1);
  B << 1, 0;
  EXPECT_THROW(solve_care(LinearModel(A, B), CostWeights::identity(2, 1)),
               NonConvergent);
}

TEST(Care, InputValidation) {
  EXPECT_THROW(LinearModel(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 1)),
               std::invalid_argument);
  EXPECT_THROW(LinearModel(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 1)),
               std::invalid_argument);
  MatrixXd bad = MatrixXd::Zero(1, 1);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(LinearModel(bad, MatrixXd::Ones(1, 1)), std::invalid_argument);
  MatrixXd asym(2, 2);
  asym << 1, 1, 0, 1;
  EXPECT_THROW(CostWeights(asym, MatrixXd::Identity(1, 1)), std::invalid_argument);
  EXPECT_THROW(CostWeights(-MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1)),
               std::invalid_argument);
  EXPECT_THROW(CostWeights(MatrixXd::Identity(2, 2), MatrixXd::Zero(1, 1)),
               std::invalid_argument);
}

TEST(Lyapunov, RandomStable) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    MatrixXd A = random_matrix(rng, n, n);
    A -= (spectral_abscissa(A) + 0.5) * MatrixXd::Identity(n, n);
    const MatrixXd L = random_matrix(rng, n, n);
    const MatrixXd C = L * L.transpose();
    const MatrixXd X = solve_continuous_lyapunov(A, C);
    EXPECT_LE((A.transpose() * X + X * A + C).norm(), 1e-9 * (1 + C.norm()));
  }
}

TEST(Linearize, DoubleIntegratorIsConstant) {
  DoubleIntegrator di;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  MatrixXd A_ref(4, 4);
  A_ref << 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0;
  MatrixXd B_ref(4, 2);
  B_ref << 0, 0, 1, 0, 0, 0, 0, 1;
  for (int i = 0; i < 5; ++i) {
    State x(4);
    x << g(rng), g(rng), g(rng), g(rng);
    Control u(2);
    u << g(rng), g(rng);
    const auto lin = linearize(di, x, u);
    EXPECT_EQ(lin.A, A_ref);
    EXPECT_EQ(lin.B, B_ref);
  }
}

TEST(Linearize, UnicycleHeadingZero) {
  Unicycle uni;
  State x(3);
  x << 4, -1, 0;
  Control u(2);
  u << 1, 0;
  const auto lin = linearize(uni, x, u);
  MatrixXd A_ref = MatrixXd::Zero(3, 3);
  A_ref(1, 2) = 1.0;
  MatrixXd B_ref(3, 2);
  B_ref << 1, 0, 0, 0, 0, 1;
  EXPECT_LE((lin.A - A_ref).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((lin.B - B_ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Linearize, UnicycleHeadingHalfPi) {
  Unicycle uni;
  State x(3);
  x << 0, 0, std::numbers::pi / 2;
  Control u(2);
  u << 1, 0;
  const auto lin = linearize(uni, x, u);
  EXPECT_NEAR(lin.A(0, 2), -1.0, 1e-15);
  EXPECT_NEAR(lin.A(1, 2), 0.0, 1e-15);
  MatrixXd B_ref(3, 2);
  B_ref << 0, 0, 1, 0, 0, 1;
  EXPECT_LE((lin.B - B_ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Policy, Examples) {
  MatrixXd K(1, 2);
  K << 1, std::sqrt(3.0);
  State x(2), ref(2);
  x << 1, 1;
  ref << 0, 0;
  EXPECT_NEAR(lqr_policy(K, x, ref)[0], -(1 + std::sqrt(3.0)), 1e-15);
  EXPECT_EQ(lqr_policy(K, x, x)[0], 0.0);
  MatrixXd K1 = MatrixXd::Ones(1, 1);
  State s(1), z(1);
  s << 2;
  z << 0;
  EXPECT_EQ(lqr_policy(K1, s, z)[0], -2.0);
}

TEST(Policy, UnicycleUsesWrappedHeading) {
  Unicycle uni;
  RiccatiSolution sol{MatrixXd::Identity(3, 3), MatrixXd::Zero(2, 3)};
  sol.K(1, 2) = 1.0;
  State x(3), ref(3);
  x << 0, 0, std::numbers::pi - 0.05;
  ref << 0, 0, -std::numbers::pi + 0.05;
  // Wrapped error is -0.1, not 2 pi - 0.1.
  EXPECT_NEAR(lqr_policy(uni, sol, x, ref)[1], 0.1, 1e-12);
}

TEST(GainCache, HitReturnsIdenticalSolution) {
  Unicycle uni;
  const auto w = CostWeights::identity(3, 2);
  GainCache cache;
  State g(3);
  g << 10, 5, 0.3;
  const RiccatiSolution first = gain_for_goal(cache, uni, w, g);
  EXPECT_EQ(cache.solver_invocations(), 1u);
  const RiccatiSolution& second = gain_for_goal(cache, uni, w, g);
  EXPECT_EQ(cache.solver_invocations(), 1u);
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(first.K, second.K);
  EXPECT_EQ(first.P, second.P);
}

TEST(GainCache, SubGridGoalsShareAnEntry) {
  Unicycle uni;
  const auto w = CostWeights::identity(3, 2);
  GainCache cache;
  State g(3);
  g << 10, 5, 0.3;
  State h = g;
  h[2] += 1e-9;
  gain_for_goal(cache, uni, w, g);
  gain_for_goal(cache, uni, w, h);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache.solver_invocations(), 1u);
}

TEST(GainCache, LinearModelSolvesOnce) {
  DoubleIntegrator di;
  const auto w = CostWeights::identity(4, 2);
  GainCache cache;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 50);
  for (int i = 0; i < 100; ++i) {
    State g(4);
    g << u(rng), 0, u(rng), 0;
    gain_for_goal(cache, di, w, g);
  }
  EXPECT_EQ(cache.solver_invocations(), 1u);
  EXPECT_EQ(cache.hits(), 99u);
}

TEST(GainCache, CachedEqualsUncachedBitwise) {
  Unicycle uni;
  const auto w = CostWeights::identity(3, 2);
  GainCache cached(true), fresh(false);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<State> goals;
  for (int i = 0; i < 20; ++i) {
    State g(3);
    g << 10 * u(rng), 10 * u(rng), u(rng);
    goals.push_back(g);
  }
  // Interleave repeated lookups; every answer must match a fresh solve.
  for (int pass = 0; pass < 3; ++pass) {
    for (const auto& g : goals) {
      const RiccatiSolution a = gain_for_goal(cached, uni, w, g);
      const RiccatiSolution& b = gain_for_goal(fresh, uni, w, g);
      EXPECT_EQ(a.K, b.K);
      EXPECT_EQ(a.P, b.P);
    }
  }
  EXPECT_EQ(cached.solver_invocations(), goals.size());
  EXPECT_EQ(fresh.solver_invocations(), 3 * goals.size());
}
