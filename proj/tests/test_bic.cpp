#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bicmppi/bic.hpp"
#include "bicmppi/rng.hpp"
#include "oracles.hpp"

using namespace bicmppi;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const OccupancyGrid> empty_grid() {
  return std::make_shared<OccupancyGrid>(OccupancyGrid::empty(30, 50, 0.1));
}

RolloutProblem diffdrive_problem(std::shared_ptr<const OccupancyGrid> grid = empty_grid()) {
  return {make_model("diffdrive"),
          InputConstraint::box(Eigen::Vector2d(0.0, -kPi / 4), Eigen::Vector2d(1.0, kPi / 4)),
          StateConstraint(std::move(grid)), 0.1};
}

StateVector pose(double x, double y, double th) { return Eigen::Vector3d(x, y, th); }

BicSettings small_settings() {
  BicSettings s;
  s.noise_variance = Eigen::Vector2d(0.25, 0.25);
  s.horizon_forward = 30;
  s.horizon_backward = 30;
  s.samples_forward = 256;
  s.samples_backward = 256;
  s.samples_guide = 256;
  return s;
}

Branch straight_branch(const Model& model, const StateVector& anchor, double v, int horizon,
                       Direction dir) {
  Branch b;
  b.controls = ControlSequence::constant(Eigen::Vector2d(v, 0.0), horizon);
  b.trajectory = rollout(model, anchor, b.controls, dir, 0.1);
  return b;
}

// Random branch set with smooth random-walk trajectories in the plane.
BranchSet random_branches(std::mt19937_64& rng, int count, int horizon, Direction dir) {
  std::normal_distribution<double> n(0.0, 0.1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  BranchSet set;
  set.direction = dir;
  for (int j = 0; j < count; ++j) {
    Branch b;
    b.controls = ControlSequence::zeros(2, horizon);
    Eigen::MatrixXd x(3, horizon + 1);
    x.col(0) << u(rng), u(rng), 0.0;
    for (int t = 1; t <= horizon; ++t) x.col(t) = x.col(t - 1) + Eigen::Vector3d(n(rng), n(rng), 0);
    b.trajectory = StateTrajectory(x);
    set.branches.push_back(b);
  }
  return set;
}

}  // namespace

TEST(ForwardCluster, BranchesStartAtInitAndAreCollisionFree) {
  const auto p = diffdrive_problem();
  const auto s = small_settings();
  const auto x0 = pose(1.5, 1.0, kPi / 2);
  const auto set = forward_cluster(p, ControlSequence::constant(Eigen::Vector2d(0.5, 0), 30), x0,
                                   pose(1.5, 4.0, kPi / 2), s, 1);
  ASSERT_GE(set.size(), 1);
  EXPECT_EQ(set.direction, Direction::kForward);
  for (const auto& b : set.branches) {
    EXPECT_EQ(b.trajectory.front(), x0);
    EXPECT_EQ(b.trajectory.horizon(), 30);
    EXPECT_FALSE(b.cost.collided);
    for (int t = 0; t < b.controls.horizon(); ++t) {
      EXPECT_TRUE(p.input_constraint.contains(b.controls.at(t)));
    }
  }
}

TEST(BackwardCluster, BranchesEndAtGoal) {
  const auto p = diffdrive_problem();
  const auto s = small_settings();
  const auto goal = pose(1.5, 4.5, kPi / 2);
  const auto set = backward_cluster(p, ControlSequence::constant(Eigen::Vector2d(0.5, 0), 30),
                                    goal, pose(1.5, 1.0, kPi / 2), s, 2);
  ASSERT_GE(set.size(), 1);
  for (const auto& b : set.branches) EXPECT_EQ(b.trajectory.at(30), goal);
}

TEST(BackwardCluster, CostDecreasesOverIterations) {
  const auto p = diffdrive_problem();
  const auto s = small_settings();
  const auto goal = pose(1.5, 4.5, kPi / 2);
  const auto init = pose(1.5, 1.0, kPi / 2);
  ControlSequence warm = ControlSequence::zeros(2, 30);
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 5; ++it) {
    const auto set = backward_cluster(p, warm, goal, init, s, derive_seed(8, {static_cast<std::uint64_t>(it)}));
    std::vector<RolloutCost> costs;
    for (const auto& b : set.branches) costs.push_back(b.cost);
    const int best = argmin_cost(costs);
    ASSERT_GE(best, 0);
    const double c = costs[static_cast<std::size_t>(best)].value;
    if (it == 0) first = c;
    last = c;
    warm = set.branches[static_cast<std::size_t>(best)].controls;
  }
  EXPECT_LT(last, first);
}

TEST(BackwardCluster, BlockedGoalFails) {
  auto g = OccupancyGrid::empty(30, 50, 0.1);
  std::vector<std::uint8_t> cells(g.cells());
  cells[static_cast<std::size_t>(45 * 30 + 15)] = 1;
  const auto p = diffdrive_problem(
      std::make_shared<OccupancyGrid>(30, 50, 0.1, Eigen::Vector2d::Zero(), cells));
  try {
    backward_cluster(p, ControlSequence::zeros(2, 10), pose(1.55, 4.55, 0), pose(1.5, 1, 0),
                     small_settings(), 3);
    FAIL() << "expected PlannerStepError";
  } catch (const PlannerStepError& e) {
    EXPECT_EQ(e.reason(), StepFailure::kNoBackwardSamples);
  }
}

TEST(NearestJunction, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(41);
  const auto model = make_model("diffdrive");
  for (int trial = 0; trial < 100; ++trial) {
    auto fwd = random_branches(rng, 1, 12, Direction::kForward);
    auto bwd = random_branches(rng, 1 + trial % 4, 9, Direction::kBackward);
    const auto j = nearest_junction(*model, fwd.branches[0].trajectory, bwd);
    std::vector<StateTrajectory> trajs;
    for (const auto& b : bwd.branches) trajs.push_back(b.trajectory);
    const auto ref = oracle::nearest_triple(*model, fwd.branches[0].trajectory, trajs);
    EXPECT_EQ(j.backward_branch, ref.backward_branch);
    EXPECT_EQ(j.forward_cut, ref.forward_cut);
    EXPECT_EQ(j.backward_cut, ref.backward_cut);
    EXPECT_DOUBLE_EQ(j.distance, ref.distance);
  }
}

TEST(NearestJunction, TiesGoToSmallestTriple) {
  const auto model = make_model("diffdrive");
  StateTrajectory fwd(Eigen::MatrixXd::Zero(3, 4));
  BranchSet bwd;
  for (int j = 0; j < 2; ++j) {
    Branch b;
    b.trajectory = StateTrajectory(Eigen::MatrixXd::Zero(3, 3));
    bwd.branches.push_back(b);
  }
  const auto j = nearest_junction(*model, fwd, bwd);
  EXPECT_EQ(j, (Junction{-1, 0, 0, 0, 0.0}));
}

TEST(Concatenate, CutArithmeticAndPadding) {
  const auto model = make_model("diffdrive");
  const auto box = InputConstraint::box(Eigen::Vector2d(0.0, -1), Eigen::Vector2d(1.0, 1));
  const auto x0 = pose(1.5, 0.5, kPi / 2);
  const auto goal = pose(1.5, 4.5, kPi / 2);
  const Branch f = straight_branch(*model, x0, 0.6, 50, Direction::kForward);
  const Branch b = straight_branch(*model, goal, 0.4, 50, Direction::kBackward);
  const Junction junction{0, 0, 20, 30, 0.0};
  const auto ref = concatenate(f, b, junction, goal, 50, box);
  EXPECT_EQ(ref.effective_horizon, 40);
  ASSERT_EQ(ref.controls.horizon(), 50);
  ASSERT_EQ(ref.states.horizon(), 50);
  EXPECT_EQ(ref.states.front(), x0);
  EXPECT_EQ(ref.states.back(), goal);
  EXPECT_EQ(ref.states.states.leftCols(21), f.trajectory.states.leftCols(21));
  EXPECT_EQ(ref.states.states.middleCols(21, 20), b.trajectory.states.rightCols(20));
  EXPECT_EQ(ref.controls.inputs.leftCols(20), f.controls.inputs.leftCols(20));
  EXPECT_EQ(ref.controls.inputs.middleCols(20, 20), b.controls.inputs.rightCols(20));
  EXPECT_TRUE(ref.controls.inputs.rightCols(10).isZero(0.0));
  for (int t = 40; t <= 50; ++t) EXPECT_EQ(ref.states.at(t), goal);
}

TEST(Concatenate, LongJoinIsNotTruncated) {
  const auto model = make_model("diffdrive");
  const auto box = InputConstraint::box(Eigen::Vector2d(0.0, -1), Eigen::Vector2d(1.0, 1));
  const auto goal = pose(1.5, 4.5, 0);
  const Branch f = straight_branch(*model, pose(1.5, 0.5, 0), 0.5, 50, Direction::kForward);
  const Branch b = straight_branch(*model, goal, 0.5, 50, Direction::kBackward);
  const auto ref = concatenate(f, b, {0, 0, 45, 10, 0.0}, goal, 50, box);
  EXPECT_EQ(ref.effective_horizon, 85);
  EXPECT_EQ(ref.controls.horizon(), 85);
  EXPECT_EQ(ref.states.horizon(), 85);
  EXPECT_EQ(ref.states.back(), goal);
}

TEST(Concatenate, PaddingUsesProjectedZero) {
  const auto model = make_model("diffdrive");
  const auto box = InputConstraint::box(Eigen::Vector2d(0.2, -1), Eigen::Vector2d(1.0, 1));
  const auto goal = pose(1.5, 4.5, 0);
  const Branch f = straight_branch(*model, pose(1.5, 0.5, 0), 0.5, 10, Direction::kForward);
  const Branch b = straight_branch(*model, goal, 0.5, 10, Direction::kBackward);
  const auto ref = concatenate(f, b, {0, 0, 2, 8, 0.0}, goal, 10, box);
  EXPECT_EQ(ref.controls.at(9), Eigen::Vector2d(0.2, 0.0));
  const auto rest = concatenate(f, b, {0, 0, 2, 8, 0.0}, goal, 10, box, Eigen::Vector2d(0.7, 3));
  EXPECT_EQ(rest.controls.at(9), Eigen::Vector2d(0.7, 1.0));
  EXPECT_EQ(rest.controls.at(3), ref.controls.at(3));
}

TEST(Associate, IntersectingBranchesJoinAtZeroDistance) {
  const auto p = diffdrive_problem();
  const auto x0 = pose(1.5, 0.5, kPi / 2);
  const auto goal = pose(1.5, 3.5, kPi / 2);
  BranchSet fwd, bwd;
  fwd.branches.push_back(straight_branch(*p.model, x0, 1.0, 20, Direction::kForward));
  bwd.branches.push_back(straight_branch(*p.model, goal, 1.0, 20, Direction::kBackward));
  const auto refs = associate(*p.model, fwd, bwd, goal, 20, p.input_constraint);
  ASSERT_EQ(refs.size(), 1u);
  EXPECT_NEAR(refs[0].junction.distance, 0.0, 1e-9);
  EXPECT_EQ(refs[0].junction.forward_branch, 0);
  EXPECT_EQ(refs[0].junction.forward_cut - refs[0].junction.backward_cut, 10);
  EXPECT_EQ(refs[0].effective_horizon, 30);
  EXPECT_EQ(refs[0].states.back(), goal);
  EXPECT_THROW(associate(*p.model, fwd, BranchSet{}, goal, 20, p.input_constraint),
               std::invalid_argument);
}

TEST(Associate, OneReferencePerForwardBranchWithFloorHorizon) {
  std::mt19937_64 rng(43);
  const auto model = make_model("diffdrive");
  const auto box = InputConstraint::box(Eigen::Vector2d(0.0, -1), Eigen::Vector2d(1.0, 1));
  const auto goal = pose(1.5, 4.5, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto fwd = random_branches(rng, 3, 15, Direction::kForward);
    auto bwd = random_branches(rng, 2, 15, Direction::kBackward);
    const auto refs = associate(*model, fwd, bwd, goal, 15, box);
    ASSERT_EQ(refs.size(), 3u);
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const auto& r = refs[i];
      EXPECT_EQ(r.junction.forward_branch, static_cast<int>(i));
      EXPECT_EQ(r.controls.horizon(), std::max(15, r.effective_horizon));
      EXPECT_EQ(r.states.horizon(), r.controls.horizon());
      EXPECT_EQ(r.states.front(), fwd.branches[i].trajectory.front());
    }
  }
}

TEST(GuideCost, ZeroWeightsReduceToVanilla) {
  const auto p = diffdrive_problem();
  auto s = small_settings();
  s.guide = {0.0, 0.0, std::numeric_limits<double>::infinity()};
  const auto x0 = pose(1.5, 1.0, kPi / 2);
  const auto goal = pose(1.5, 4.0, kPi / 2);
  GuideReference ref;
  ref.controls = ControlSequence::constant(Eigen::Vector2d(0.5, 0.1), 30);
  ref.states = rollout(*p.model, x0, ref.controls, Direction::kForward, p.dt);
  ref.effective_horizon = 30;
  const NoiseSpec noise{s.noise_variance, s.gamma, 5};
  const auto guided =
      sample_batch(p, ref.controls, noise, 64, x0, Direction::kForward,
                   make_guide_cost(p, ref, goal, s));
  const auto vanilla = sample_batch(p, ref.controls, noise, 64, x0, Direction::kForward,
                                    CostModel{s.terminal_weight, {}, goal, 0.0});
  for (std::size_t k = 0; k < 64; ++k) EXPECT_EQ(guided.costs[k], vanilla.costs[k]);
}

TEST(GuideCost, ReferenceRolloutPaysOnlyVanillaAndGoal) {
  const auto p = diffdrive_problem();
  auto s = small_settings();
  s.guide = {10.0, 3.0, 0.5};
  const auto x0 = pose(1.5, 1.0, kPi / 2);
  const auto goal = pose(1.5, 4.0, kPi / 2);
  GuideReference ref;
  ref.controls = ControlSequence::constant(Eigen::Vector2d(0.8, 0.0), 30);
  ref.states = rollout(*p.model, x0, ref.controls, Direction::kForward, p.dt);
  ref.effective_horizon = 20;
  const auto cost = make_guide_cost(p, ref, goal, s)(ref.states, ref.controls);
  const auto vanilla = evaluate_cost(*p.model, ref.states, ref.controls,
                                     CostModel{s.terminal_weight, {}, goal, 0.0},
                                     p.state_constraint, Direction::kForward);
  const double goal_term = (p.model->position(ref.states.at(20)) - p.model->position(goal)).norm() / 0.5;
  EXPECT_DOUBLE_EQ(cost.value, vanilla.value + goal_term);
}

TEST(GuideMppi, TracksFeasibleReference) {
  auto p = diffdrive_problem();
  p.dt = 0.05;
  auto s = small_settings();
  s.guide.lambda_x = 10.0;
  s.samples_guide = 512;
  s.terminal_weight = 1.0;
  const auto x0 = pose(1.5, 1.0, kPi / 2);
  GuideReference ref;
  ref.controls = ControlSequence::constant(Eigen::Vector2d(0.6, 0.3), 40);
  ref.states = rollout(*p.model, x0, ref.controls, Direction::kForward, p.dt);
  ref.effective_horizon = 40;
  const StateVector goal = ref.states.back();
  const auto out = guide_mppi(p, ref, x0, goal, s, 99);
  ASSERT_TRUE(out.has_value());
  const auto traj = rollout(*p.model, x0, *out, Direction::kForward, p.dt);
  double worst = 0.0;
  for (int t = 0; t <= 40; ++t) {
    worst = std::max(worst, (p.model->position(traj.at(t)) - p.model->position(ref.states.at(t))).norm());
  }
  EXPECT_LE(worst, 0.1);
}

TEST(SelectCandidate, Argmin) {
  EXPECT_EQ(select_candidate({{5.0, false, false}, {2.0, false, false}, {9.0, false, false}}), 1);
  EXPECT_EQ(select_candidate({{5.0, false, false}}), 0);
  EXPECT_EQ(select_candidate({{1.0, true, false}, {4.0, false, false}}), 1);
}

TEST(BicStep, EmptyMapStepIsFeasibleAndDeterministic) {
  const auto p = diffdrive_problem();
  const auto s = small_settings();
  const auto x0 = pose(1.5, 1.0, kPi / 2);
  const auto goal = pose(1.5, 4.0, kPi / 2);
  const auto uf = ControlSequence::zeros(2, 30);
  const auto ub = ControlSequence::zeros(2, 30);
  const auto a = bic_mppi_step(p, uf, ub, x0, goal, s, 123);
  const auto b = bic_mppi_step(p, uf, ub, x0, goal, s, 123);
  EXPECT_EQ(a.control, b.control);
  EXPECT_EQ(a.backward_warm_start, b.backward_warm_start);
  EXPECT_GE(a.control.horizon(), 30);
  EXPECT_EQ(a.backward_warm_start.horizon(), 30);
  for (int t = 0; t < a.control.horizon(); ++t) {
    EXPECT_TRUE(p.input_constraint.contains(a.control.at(t)));
  }
  const auto& d = a.diagnostics;
  EXPECT_GE(d.forward_branches, 1);
  EXPECT_GE(d.backward_branches, 1);
  EXPECT_EQ(static_cast<int>(d.candidate_costs.size()), d.forward_branches);
  ASSERT_GE(d.selected_candidate, 0);
  EXPECT_EQ(d.selected_candidate, select_candidate(d.candidate_costs));
}

TEST(BicStep, MaxCandidatesCapsGuidedPasses) {
  const auto p = diffdrive_problem();
  auto s = small_settings();
  s.dbscan.eps_max = 0.02;
  s.max_candidates = 1;
  const auto r = bic_mppi_step(p, ControlSequence::zeros(2, 30), ControlSequence::zeros(2, 30),
                               pose(1.5, 1.0, kPi / 2), pose(1.5, 4.0, kPi / 2), s, 5);
  EXPECT_EQ(r.diagnostics.candidate_costs.size(), 1u);
}

TEST(BicStep, ReducesToVanillaWithOneClusterAndNoGuide) {
  const auto p = diffdrive_problem();
  auto s = small_settings();
  s.dbscan.eps_max = 1e6;
  s.guide = {0.0, 0.0, std::numeric_limits<double>::infinity()};
  const auto x0 = pose(1.5, 1.0, kPi / 2);
  const auto goal = pose(1.5, 4.0, kPi / 2);
  const std::uint64_t seed = 77;
  const auto r = bic_mppi_step(p, ControlSequence::zeros(2, 30), ControlSequence::zeros(2, 30),
                               x0, goal, s, seed);
  ASSERT_EQ(r.diagnostics.forward_branches, 1);
  // Re-derive the single guided candidate as a vanilla step from its reference.
  const auto fwd = forward_cluster(p, ControlSequence::zeros(2, 30), x0, goal, s, derive_seed(seed, {1}));
  const auto bwd = backward_cluster(p, ControlSequence::zeros(2, 30), goal, x0, s, derive_seed(seed, {2}));
  const auto refs = associate(*p.model, fwd, bwd, goal, 30, p.input_constraint);
  MppiSettings vanilla{{s.noise_variance, s.gamma, derive_seed(seed, {3, 0})}, s.samples_guide,
                       CostModel{s.terminal_weight, {}, goal, 0.0}};
  EXPECT_EQ(r.control, vanilla_mppi_step(p, refs[0].controls, x0, vanilla));
}

TEST(BicStep, FullyBlockedStartReportsForwardFailure) {
  std::vector<std::uint8_t> cells(30 * 50, 0);
  for (int r = 0; r < 50; ++r) {
    for (int c = 0; c < 30; ++c) {
      if (std::abs(c - 15) <= 2 && std::abs(r - 10) <= 2) cells[static_cast<std::size_t>(r * 30 + c)] = 1;
    }
  }
  const auto p = diffdrive_problem(
      std::make_shared<OccupancyGrid>(30, 50, 0.1, Eigen::Vector2d::Zero(), cells));
  try {
    bic_mppi_step(p, ControlSequence::zeros(2, 10), ControlSequence::zeros(2, 10),
                  pose(1.55, 1.05, 0), pose(1.5, 4.0, 0), small_settings(), 1);
    FAIL() << "expected PlannerStepError";
  } catch (const PlannerStepError& e) {
    EXPECT_EQ(e.reason(), StepFailure::kNoForwardSamples);
    EXPECT_EQ(to_string(e.reason()), "no_forward_samples");
  }
}
