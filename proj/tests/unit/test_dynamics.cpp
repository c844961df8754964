#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lqrcbf/dynamics.hpp"
#include "lqrcbf/lqr.hpp"

using namespace lqrcbf;

namespace {

State make_state(std::initializer_list<double> v) {
  State x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

State random_state(const DynamicsModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-20, 20), ang(-3.1, 3.1);
  State x(m.state_dim());
  for (int i = 0; i < m.state_dim(); ++i) x[i] = pos(rng);
  if (m.name() == "unicycle") x[2] = ang(rng);
  return x;
}

Control random_control(const DynamicsModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-2, 2);
  Control u(m.control_dim());
  for (int i = 0; i < m.control_dim(); ++i) u[i] = d(rng);
  return u;
}

// High-accuracy reference: RK4 with many substeps, heading left unwrapped.
State rk4(const DynamicsModel& m, State x, const Control& u, double T, int steps) {
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    const State k1 = eval_dynamics(m, x, u);
    const State k2 = eval_dynamics(m, x + 0.5 * h * k1, u);
    const State k3 = eval_dynamics(m, x + 0.5 * h * k2, u);
    const State k4 = eval_dynamics(m, x + h * k3, u);
    x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

double euler_error(const DynamicsModel& m, const State& x0, const Control& u,
                   double T, double dt) {
  State x = x0;
  const int n = static_cast<int>(std::lround(T / dt));
  for (int i = 0; i < n; ++i) x = integrate_step(m, x, u, dt);
  const State ref = m.normalize(rk4(m, x0, u, T, 4000));
  return m.difference(x, ref).norm();
}

}  // namespace

TEST(Dynamics, DoubleIntegratorDrift) {
  DoubleIntegrator di;
  const State f = eval_dynamics(di, make_state({0, 1, 0, 2}), Control::Zero(2));
  EXPECT_EQ(f, make_state({1, 0, 2, 0}));
}

TEST(Dynamics, UnicycleExamples) {
  Unicycle uni;
  EXPECT_EQ(eval_dynamics(uni, make_state({0, 0, 0}), make_state({1, 0.5})),
            make_state({1, 0, 0.5}));
  const State f =
      eval_dynamics(uni, make_state({0, 0, std::numbers::pi / 2}), make_state({2, 0}));
  EXPECT_NEAR(f[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(f[1], 2.0);
  EXPECT_EQ(f[2], 0.0);
}

TEST(Dynamics, EulerStepExample) {
  DoubleIntegrator di;
  EXPECT_EQ(integrate_step(di, make_state({0, 1, 0, 0}), Control::Zero(2), 0.05),
            make_state({0.05, 1, 0, 0}));
}

TEST(Dynamics, HeadingWrapsAcrossPi) {
  Unicycle uni;
  const State x =
      integrate_step(uni, make_state({0, 0, std::numbers::pi - 0.01}), make_state({0, 1}), 0.05);
  EXPECT_GT(x[2], -std::numbers::pi);
  EXPECT_LE(x[2], std::numbers::pi);
  EXPECT_NEAR(x[2], -std::numbers::pi + 0.04, 1e-12);
}

TEST(Dynamics, WrapAngleRange) {
  EXPECT_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  for (double a = -20; a < 20; a += 0.37) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -std::numbers::pi);
    EXPECT_LE(w, std::numbers::pi);
    EXPECT_NEAR(std::remainder(w - a, 2 * std::numbers::pi), 0.0, 1e-12);
  }
}

TEST(Dynamics, EulerConsistencyAndLinearInDt) {
  std::mt19937_64 rng(2);
  for (const auto& m : {make_model("double_integrator_4d"), make_model("unicycle")}) {
    for (int i = 0; i < 50; ++i) {
      const State x = random_state(*m, rng);
      const Control u = random_control(*m, rng);
      const State f = eval_dynamics(*m, x, u);
      const State step = integrate_step(*m, x, u, 0.05);
      EXPECT_LE(m->difference(step, m->normalize(x + 0.05 * f)).norm(), 0.0);
      const State a = m->difference(integrate_step(*m, x, u, 0.01), x);
      const State b = m->difference(integrate_step(*m, x, u, 0.02), x);
      EXPECT_LE((b - 2 * a).norm(), 1e-12 * (1 + b.norm()));
    }
  }
}

TEST(Dynamics, ControlAffine) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> alpha(0, 1);
  for (const auto& m : {make_model("double_integrator_4d"), make_model("unicycle")}) {
    for (int i = 0; i < 100; ++i) {
      const State x = random_state(*m, rng);
      const Control u1 = random_control(*m, rng);
      const Control u2 = random_control(*m, rng);
      const double a = alpha(rng);
      const State lhs = eval_dynamics(*m, x, a * u1 + (1 - a) * u2);
      const State rhs =
          a * eval_dynamics(*m, x, u1) + (1 - a) * eval_dynamics(*m, x, u2);
      EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1 + lhs.norm()));
    }
  }
}

TEST(Dynamics, EulerGlobalErrorIsFirstOrder) {
  std::mt19937_64 rng(6);
  for (const auto& m : {make_model("double_integrator_4d"), make_model("unicycle")}) {
    int checked = 0;
    for (int i = 0; i < 50; ++i) {
      const State x = random_state(*m, rng);
      Control u = random_control(*m, rng);
      if (m->name() == "unicycle" && std::abs(u[1]) < 0.2) u[1] = 0.5;
      if (m->name() == "unicycle" && std::abs(u[0]) < 0.5) u[0] = 1.0;
      if (m->name() == "double_integrator_4d" && u.norm() < 0.2) u[0] = 1.0;
      const double e1 = euler_error(*m, x, u, 1.0, 0.02);
      const double e2 = euler_error(*m, x, u, 1.0, 0.01);
      const double ratio = e1 / e2;
      EXPECT_GE(ratio, 1.8) << m->name() << ' ' << i;
      EXPECT_LE(ratio, 2.2) << m->name() << ' ' << i;
      ++checked;
    }
    EXPECT_EQ(checked, 50);
  }
}

TEST(Dynamics, JacobiansMatchCentralDifferences) {
  std::mt19937_64 rng(8);
  const double h = 1e-6;
  for (const auto& m : {make_model("double_integrator_4d"), make_model("unicycle")}) {
    for (int trial = 0; trial < 100; ++trial) {
      const State x = random_state(*m, rng);
      const Control u = random_control(*m, rng);
      const auto lin = linearize(*m, x, u);
      for (int j = 0; j < m->state_dim(); ++j) {
        State xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const State col =
            (eval_dynamics(*m, xp, u) - eval_dynamics(*m, xm, u)) / (2 * h);
        for (int i = 0; i < m->state_dim(); ++i) {
          EXPECT_NEAR(lin.A(i, j), col[i], 1e-5) << m->name() << " A " << i << j;
        }
      }
      for (int j = 0; j < m->control_dim(); ++j) {
        Control up = u, um = u;
        up[j] += h;
        um[j] -= h;
        const State col =
            (eval_dynamics(*m, x, up) - eval_dynamics(*m, x, um)) / (2 * h);
        for (int i = 0; i < m->state_dim(); ++i) {
          EXPECT_NEAR(lin.B(i, j), col[i], 1e-5) << m->name() << " B " << i << j;
        }
      }
    }
  }
}

TEST(Dynamics, LipschitzRatioBounded) {
  std::mt19937_64 rng(9);
  for (const auto& m : {make_model("double_integrator_4d"), make_model("unicycle")}) {
    double worst = 0.0;
    const Control u = m->nominal_control();
    for (int i = 0; i < 500; ++i) {
      const State a = random_state(*m, rng);
      const State b = random_state(*m, rng);
      const double num = (eval_dynamics(*m, a, u) - eval_dynamics(*m, b, u)).norm();
      const double den = m->difference(a, b).norm();
      if (den > 1e-9) worst = std::max(worst, num / den);
    }
    EXPECT_LT(worst, 10.0) << m->name();
  }
}

TEST(Dynamics, UnicycleAdmissibleFixesSpeed) {
  Unicycle uni(1.5);
  const Control c = uni.admissible(make_state({-3, 0.4}));
  EXPECT_EQ(c[0], 1.5);
  EXPECT_EQ(c[1], 0.4);
  ModelOptions opts;
  opts.unicycle_speed = 1.0;
  opts.control_bounds = ControlBounds{make_state({0, -0.5}), make_state({2, 0.5})};
  const auto m = make_model("unicycle", opts);
  const Control d = m->admissible(make_state({7, 3}));
  EXPECT_EQ(d[0], 1.0);
  EXPECT_EQ(d[1], 0.5);
  EXPECT_THROW(Unicycle(0.0), std::invalid_argument);
}

TEST(Dynamics, ControlBoundsClampDoubleIntegrator) {
  ModelOptions opts;
  opts.control_bounds = ControlBounds{make_state({-1, -1}), make_state({1, 1})};
  const auto m = make_model("double_integrator_4d", opts);
  EXPECT_EQ(m->admissible(make_state({3, -0.5})), make_state({1, -0.5}));
  opts.control_bounds = ControlBounds{make_state({1, 1}), make_state({-1, -1})};
  EXPECT_THROW(make_model("double_integrator_4d", opts), std::invalid_argument);
  EXPECT_THROW(make_model("bicycle"), std::invalid_argument);
}

TEST(Dynamics, LiftAndWorkspace) {
  DoubleIntegrator di;
  const State x = di.lift({3, 4}, make_state({0, 9, 0, 9}));
  EXPECT_EQ(x, make_state({3, 0, 4, 0}));
  EXPECT_EQ(di.workspace(x), Point2(3, 4));
  Unicycle uni;
  const State y = uni.lift({1, 1}, make_state({0, 0, 2.0}));
  EXPECT_NEAR(y[2], std::numbers::pi / 4, 1e-15);
  EXPECT_EQ(uni.workspace(y), Point2(1, 1));
}

TEST(Dynamics, PathLength) {
  DoubleIntegrator di;
  std::vector<State> s{make_state({0, 0, 0, 0}), make_state({3, 0, 4, 0}),
                       make_state({3, 0, 5, 0})};
  EXPECT_DOUBLE_EQ(path_length(di, s), 6.0);
}
