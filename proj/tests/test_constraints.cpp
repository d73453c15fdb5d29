#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "bicmppi/constraints.hpp"
#include "oracles.hpp"

using namespace bicmppi;

namespace {

constexpr double kPi = std::numbers::pi;

InputConstraint diffdrive_box() {
  return InputConstraint::box(Eigen::Vector2d(0.0, -kPi / 4), Eigen::Vector2d(1.0, kPi / 4));
}

InputConstraint thrust_cone() { return InputConstraint::norm_cone(20.0, kPi / 3); }

InputVector v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

// Rejection sampling inside the cone/ball.
InputVector random_cone_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const auto cone = thrust_cone();
  while (true) {
    InputVector p = v3(u(rng), u(rng), u(rng));
    if (cone.contains(p)) return p;
  }
}

}  // namespace

TEST(BoxProjection, ClampsComponentwise) {
  const auto p = diffdrive_box().project(Eigen::Vector2d(1.5, 1.0));
  EXPECT_EQ(p(0), 1.0);
  EXPECT_EQ(p(1), kPi / 4);
  EXPECT_EQ(diffdrive_box().project(Eigen::Vector2d(-0.2, -3.0)),
            Eigen::Vector2d(0.0, -kPi / 4));
}

TEST(BoxProjection, FeasibleIsUnchanged) {
  const InputVector u = Eigen::Vector2d(0.3, -0.1);
  EXPECT_EQ(diffdrive_box().project(u), u);
}

TEST(BoxConstraint, RejectsInvertedBounds) {
  EXPECT_THROW(InputConstraint::box(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)),
               std::invalid_argument);
  EXPECT_THROW(InputConstraint::box(Eigen::Vector2d(0, 0), Eigen::Vector3d(1, 1, 1)),
               std::invalid_argument);
}

TEST(NormCone, RejectsBadParameters) {
  EXPECT_THROW(InputConstraint::norm_cone(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(InputConstraint::norm_cone(1.0, kPi / 2), std::invalid_argument);
  EXPECT_THROW(InputConstraint::norm_cone(1.0, 0.0), std::invalid_argument);
}

TEST(NormConeProjection, DownwardInputGoesToApex) {
  const auto p = thrust_cone().project(v3(0, 0, -5));
  EXPECT_LE(p.norm(), 1e-12);
  EXPECT_LE((Eigen::Vector3d(p) - oracle::cone_ball_projection({0, 0, -5}, 20.0, kPi / 3)).norm(),
            1e-6);
}

TEST(NormConeProjection, FeasibleIsUnchanged) {
  const InputVector u = v3(1.0, -2.0, 9.81);
  EXPECT_EQ(thrust_cone().project(u), u);
}

TEST(NormConeProjection, MatchesNumericOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d x(u(rng), u(rng), u(rng));
    const InputVector p = thrust_cone().project(x);
    const Eigen::Vector3d ref = oracle::cone_ball_projection(x, 20.0, kPi / 3);
    EXPECT_LE((Eigen::Vector3d(p) - ref).norm(), 1e-6) << x.transpose();
  }
}

TEST(Projection, Idempotent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int k = 0; k < 1000; ++k) {
    const InputVector b = diffdrive_box().project(Eigen::Vector2d(u(rng), u(rng)));
    EXPECT_EQ(diffdrive_box().project(b), b);
    const InputVector c = thrust_cone().project(v3(u(rng), u(rng), u(rng)));
    EXPECT_EQ(thrust_cone().project(c), c);
  }
}

TEST(Projection, NoFeasiblePointIsCloser) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  std::uniform_real_distribution<double> v(0.0, 1.0), w(-kPi / 4, kPi / 4);
  for (int k = 0; k < 1000; ++k) {
    const InputVector x = v3(u(rng), u(rng), u(rng));
    const InputVector feasible = random_cone_point(rng);
    EXPECT_LE((thrust_cone().project(x) - x).norm(), (feasible - x).norm() + 1e-9);

    const InputVector y = Eigen::Vector2d(u(rng), u(rng));
    const InputVector in_box = Eigen::Vector2d(v(rng), w(rng));
    EXPECT_LE((diffdrive_box().project(y) - y).norm(), (in_box - y).norm() + 1e-9);
  }
}

TEST(Projection, ConvexCombinationsStayFeasible) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-40.0, 40.0), t(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = t(rng);
    const InputVector b1 = diffdrive_box().project(Eigen::Vector2d(u(rng), u(rng)));
    const InputVector b2 = diffdrive_box().project(Eigen::Vector2d(u(rng), u(rng)));
    EXPECT_TRUE(diffdrive_box().contains(a * b1 + (1 - a) * b2, 1e-12));
    const InputVector c1 = thrust_cone().project(v3(u(rng), u(rng), u(rng)));
    const InputVector c2 = thrust_cone().project(v3(u(rng), u(rng), u(rng)));
    EXPECT_TRUE(thrust_cone().contains(a * c1 + (1 - a) * c2, 1e-9));
  }
}

TEST(Projection, SequenceIsStepwise) {
  Eigen::MatrixXd u(2, 3);
  u << 2.0, 0.5, -1.0, 0.0, 3.0, -3.0;
  ControlSequence seq(u);
  diffdrive_box().project_sequence(seq);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(seq.at(t), diffdrive_box().project(u.col(t)));
}

TEST(StateConstraint, IndicatorOnGrid) {
  const auto dd = make_model("diffdrive");
  std::vector<std::uint8_t> cells(16, 0);
  cells[5] = 1;  // col 1, row 1
  const auto grid = std::make_shared<OccupancyGrid>(4, 4, 0.5, Eigen::Vector2d::Zero(), cells);
  const StateConstraint sc(grid);
  EXPECT_EQ(sc.indicator(*dd, Eigen::Vector3d(0.25, 0.25, 1.0)), 0.0);
  EXPECT_TRUE(std::isinf(sc.indicator(*dd, Eigen::Vector3d(0.75, 0.75, 0.0))));
  EXPECT_TRUE(sc.violated(*dd, Eigen::Vector3d(2.5, 0.25, 0.0)));
}

TEST(StateConstraint, ExtraBoundsOnAltitude) {
  const auto quad = make_model("quadrotor");
  const auto grid = std::make_shared<OccupancyGrid>(OccupancyGrid::empty(30, 50, 0.1));
  StateVector lower(6), upper(6);
  const double inf = std::numeric_limits<double>::infinity();
  lower << -inf, -inf, 0.0, -inf, -inf, -inf;
  upper << inf, inf, 5.0, inf, inf, inf;
  const StateConstraint sc(grid, StateBounds{lower, upper});
  StateVector x(6);
  x << 1.5, 2.0, 2.5, 0, 0, 0;
  EXPECT_FALSE(sc.violated(*quad, x));
  x(2) = 5.2;
  EXPECT_TRUE(sc.violated(*quad, x));
  x(2) = -0.1;
  EXPECT_TRUE(sc.violated(*quad, x));
}

TEST(StateConstraint, NoGridNoBoundsNeverViolated) {
  const auto dd = make_model("diffdrive");
  EXPECT_FALSE(StateConstraint().violated(*dd, Eigen::Vector3d(-100, 100, 0)));
}
