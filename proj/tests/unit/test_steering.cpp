#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lqrcbf/steering.hpp"

using namespace lqrcbf;

namespace {

State make_state(std::initializer_list<double> v) {
  State x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

std::vector<ObstacleSpec> paper_obstacles() {
  std::vector<ObstacleSpec> obs;
  for (const auto& c : std::vector<Point2>{{7, 12}, {46, 10}, {25, 10}, {15, 5},
                                           {15, 15}, {37, 7}, {37, 23}}) {
    obs.emplace_back(c, 2.0);
  }
  return obs;
}

struct Fixture {
  std::shared_ptr<DynamicsModel> model;
  std::vector<ObstacleSpec> obstacles;
  CbfParams cbf;
  CostWeights weights;
  SteerConfig config;
  GainCache cache;
  Steerer steerer;

  Fixture(const std::string& name, std::vector<ObstacleSpec> obs, CbfParams p)
      : model(make_model(name)),
        obstacles(std::move(obs)),
        cbf(p),
        weights(CostWeights::identity(model->state_dim(), model->control_dim())),
        steerer(*model, obstacles, cbf, weights, config, cache) {}
};

Fixture di_fixture(std::vector<ObstacleSpec> obs = {}) {
  return Fixture("double_integrator_4d", std::move(obs),
                 CbfParams(6, 1.5, ZetaForm::kDoubleIntegrator));
}

}  // namespace

TEST(Steering, ObstacleFreeReachesGoal) {
  auto f = di_fixture();
  const auto r = f.steerer.steer(make_state({0, 0, 0, 0}), make_state({3, 0, 4, 0}));
  EXPECT_EQ(r.status, SteerStatus::kReached);
  EXPECT_TRUE(r.extended());
  EXPECT_LE((f.model->workspace(r.trajectory.back()) - Point2(3, 4)).norm(), 0.1);
  EXPECT_EQ(r.trajectory.states.size(), r.trajectory.controls.size() + 1);
  EXPECT_GT(r.trajectory.cost, 0.0);
}

TEST(Steering, WithinToleranceIsTrivial) {
  auto f = di_fixture();
  const auto r = f.steerer.steer(make_state({1, 0, 1, 0}), make_state({1.05, 0, 1, 0}));
  EXPECT_EQ(r.status, SteerStatus::kReached);
  EXPECT_EQ(r.trajectory.states.size(), 1u);
  EXPECT_EQ(r.trajectory.cost, 0.0);
  EXPECT_FALSE(r.extended());
}

TEST(Steering, HorizonStopsFarTargets) {
  auto f = di_fixture();
  f.config.max_steps = 3;
  const auto r = f.steerer.steer(make_state({0, 0, 0, 0}), make_state({40, 0, 20, 0}));
  EXPECT_EQ(r.status, SteerStatus::kHorizon);
  EXPECT_EQ(r.trajectory.steps(), 3u);
}

TEST(Steering, UnicycleReachesNearbyPoint) {
  Fixture f("unicycle", {}, CbfParams(2, 2, ZetaForm::kUnicycleDerived));
  const auto r = f.steerer.steer(make_state({0, 0, 0}), make_state({3, 0.5, 0}));
  EXPECT_EQ(r.status, SteerStatus::kReached);
  for (const auto& u : r.trajectory.controls) EXPECT_EQ(u[0], 1.0);
}

TEST(Steering, CostMatchesRecomputation) {
  auto f = di_fixture(paper_obstacles());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> px(0, 50), py(0, 30);
  for (int i = 0; i < 50; ++i) {
    const State a = f.model->lift({px(rng), py(rng)}, State::Zero(4));
    const State b = f.model->lift({px(rng), py(rng)}, State::Zero(4));
    if (min_h(f.obstacles, a, *f.model) < 0) continue;
    const auto r = f.steerer.steer(a, b);
    const double c = trajectory_cost(*f.model, r.trajectory, f.weights, b);
    EXPECT_NEAR(r.trajectory.cost, c, 1e-9 * (1 + c));
  }
}

TEST(Steering, TrajectoryCostExample) {
  DoubleIntegrator di;
  Trajectory t;
  t.dt = 0.5;
  t.states = {make_state({1, 0, 0, 0}), make_state({1, 1, 0, 0})};
  t.controls = {make_state({2, 0})};
  // e = [1,0,0,0], u = [2,0]: (1 + 4) * 0.5.
  EXPECT_DOUBLE_EQ(trajectory_cost(di, t, CostWeights::identity(4, 2), State::Zero(4)), 2.5);
  t.states.resize(1);
  t.controls.clear();
  EXPECT_EQ(trajectory_cost(di, t, CostWeights::identity(4, 2), State::Zero(4)), 0.0);
}

TEST(Steering, AimingAtObstacleTruncatesToSafePrefix) {
  auto f = di_fixture(paper_obstacles());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-3.14, 3.14), dist(2.5, 6.0);
  int truncated = 0;
  for (int i = 0; i < 40; ++i) {
    const auto& o = f.obstacles[static_cast<std::size_t>(i) % f.obstacles.size()];
    const double a = ang(rng), d = dist(rng);
    const State start =
        f.model->lift(o.center + d * Point2(std::cos(a), std::sin(a)), State::Zero(4));
    if (min_h(f.obstacles, start, *f.model) < 0) continue;
    const State target = f.model->lift(o.center, State::Zero(4));
    const auto r = f.steerer.steer(start, target);
    EXPECT_FALSE(r.reached());
    EXPECT_TRUE(r.status == SteerStatus::kTruncated ||
                r.status == SteerStatus::kEmptyExtension);
    if (r.status == SteerStatus::kTruncated) ++truncated;
    const auto free = f.steerer.unconstrained_rollout(start, target);
    ASSERT_LT(r.trajectory.states.size(), free.states.size());
    for (std::size_t t = 0; t < r.trajectory.states.size(); ++t) {
      EXPECT_EQ(r.trajectory.states[t], free.states[t]);
      if (t > 0) {
        EXPECT_TRUE(f.steerer.step_is_safe(r.trajectory.states[t],
                                           r.trajectory.controls[t - 1]));
      }
    }
    // The dropped step is the first unsafe one.
    const std::size_t k = r.trajectory.steps();
    EXPECT_FALSE(f.steerer.step_is_safe(free.states[k + 1], free.controls[k]));
  }
  EXPECT_GT(truncated, 0);
}

TEST(Steering, EmptyExtensionFromBoundary) {
  auto f = di_fixture({ObstacleSpec({0, 0}, 1.0)});
  const State start = make_state({1.0 + 1e-9, -2.0, 0, 0});
  const auto r = f.steerer.steer(start, make_state({0, 0, 0, 0}));
  EXPECT_EQ(r.status, SteerStatus::kEmptyExtension);
  EXPECT_EQ(r.trajectory.states.size(), 1u);
  EXPECT_EQ(r.trajectory.cost, 0.0);
}

TEST(Steering, Deterministic) {
  auto f = di_fixture(paper_obstacles());
  auto g = di_fixture(paper_obstacles());
  const State a = make_state({2, 0, 2, 0}), b = make_state({9, 0, 6, 0});
  const auto r1 = f.steerer.steer(a, b);
  const auto r2 = g.steerer.steer(a, b);
  EXPECT_EQ(r1.status, r2.status);
  EXPECT_EQ(r1.trajectory.cost, r2.trajectory.cost);
  ASSERT_EQ(r1.trajectory.states.size(), r2.trajectory.states.size());
  for (std::size_t t = 0; t < r1.trajectory.states.size(); ++t) {
    EXPECT_EQ(r1.trajectory.states[t], r2.trajectory.states[t]);
  }
}

TEST(Steering, ConfigValidation) {
  SteerConfig c;
  c.dt = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.max_steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.goal_tolerance = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
