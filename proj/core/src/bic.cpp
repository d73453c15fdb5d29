#include "bicmppi/bic.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bicmppi/rng.hpp"

namespace bicmppi {

std::string to_string(StepFailure failure) {
  switch (failure) {
    case StepFailure::kNoForwardSamples: return "no_forward_samples";
    case StepFailure::kNoBackwardSamples: return "no_backward_samples";
    case StepFailure::kAllCandidatesCollided: return "all_candidates_collided";
  }
  return "unknown";
}

namespace {

CostModel make_cost_model(const BicSettings& settings, const StateVector& target) {
  return CostModel{settings.terminal_weight, settings.stage_input_weight, target,
                   settings.stage_position_weight};
}

BranchSet clustered_branches(const RolloutProblem& problem, const ControlSequence& initial,
                             const StateVector& anchor, const StateVector& target,
                             Direction direction, int samples, const BicSettings& settings,
                             std::uint64_t seed) {
  const NoiseSpec noise{settings.noise_variance, settings.gamma, seed};
  const CostModel cost = make_cost_model(settings, target);
  const RolloutBatch batch =
      sample_batch(problem, initial, noise, samples, anchor, direction, cost);

  BranchSet set;
  set.direction = direction;
  set.valid_samples = batch.valid_count();
  if (set.valid_samples == 0) {
    const bool fwd = direction == Direction::kForward;
    throw PlannerStepError(fwd ? StepFailure::kNoForwardSamples : StepFailure::kNoBackwardSamples,
                           fwd ? "forward pass: every sample collided"
                               : "backward pass: every sample collided");
  }
  const FeatureMatrix features = build_features(batch, settings.noise_variance, settings.dbscan);
  const ClusterSet clusters = dbscan(features, settings.dbscan);
  set.fallback = clusters.fallback;
  std::vector<ControlSequence> controls =
      cluster_controls(batch, clusters, settings.gamma, problem.input_constraint);

  set.branches.resize(controls.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(controls.size()); ++i) {
    auto& branch = set.branches[static_cast<std::size_t>(i)];
    branch.controls = std::move(controls[static_cast<std::size_t>(i)]);
    try {
      branch.trajectory = rollout(*problem.model, anchor, branch.controls, direction, problem.dt);
      branch.cost = evaluate_cost(*problem.model, branch.trajectory, branch.controls, cost,
                                  problem.state_constraint, direction);
    } catch (const NumericError&) {
      branch.trajectory = StateTrajectory(Eigen::MatrixXd::Constant(
          anchor.size(), branch.controls.horizon() + 1, std::numeric_limits<double>::quiet_NaN()));
      branch.cost = {0.0, true, true};
    }
  }
  return set;
}

}  // namespace

BranchSet forward_cluster(const RolloutProblem& problem, const ControlSequence& initial,
                          const StateVector& x_init, const StateVector& x_goal,
                          const BicSettings& settings, std::uint64_t seed) {
  return clustered_branches(problem, initial, x_init, x_goal, Direction::kForward,
                            settings.samples_forward, settings, seed);
}

BranchSet backward_cluster(const RolloutProblem& problem, const ControlSequence& initial,
                           const StateVector& x_goal, const StateVector& x_init,
                           const BicSettings& settings, std::uint64_t seed) {
  return clustered_branches(problem, initial, x_goal, x_init, Direction::kBackward,
                            settings.samples_backward, settings, seed);
}

Junction nearest_junction(const Model& model, const StateTrajectory& forward,
                          const BranchSet& backward) {
  const int d = model.position_dim();
  Eigen::MatrixXd fwd_pos(d, forward.horizon() + 1);
  for (int t = 0; t <= forward.horizon(); ++t) fwd_pos.col(t) = model.position(forward.at(t));

  Junction best;
  double best_sq = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd bwd_pos;
  for (int j = 0; j < backward.size(); ++j) {
    const auto& traj = backward.branches[static_cast<std::size_t>(j)].trajectory;
    bwd_pos.resize(d, traj.horizon() + 1);
    for (int t = 0; t <= traj.horizon(); ++t) bwd_pos.col(t) = model.position(traj.at(t));
    for (int tau = 0; tau < fwd_pos.cols(); ++tau) {
      for (int tau_b = 0; tau_b < bwd_pos.cols(); ++tau_b) {
        const double sq = (fwd_pos.col(tau) - bwd_pos.col(tau_b)).squaredNorm();
        if (sq < best_sq) {
          best_sq = sq;
          best.backward_branch = j;
          best.forward_cut = tau;
          best.backward_cut = tau_b;
        }
      }
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

GuideReference concatenate(const Branch& forward, const Branch& backward, const Junction& junction,
                           const StateVector& x_goal, int min_horizon,
                           const InputConstraint& constraint, const InputVector& rest) {
  const int tau = junction.forward_cut;
  const int tau_b = junction.backward_cut;
  const int horizon_b = backward.controls.horizon();
  const int joined = tau + (horizon_b - tau_b);
  const int total = std::max(joined, min_horizon);
  const int m = forward.controls.input_dim();
  const int n = forward.trajectory.state_dim();

  Eigen::MatrixXd u(m, total);
  Eigen::MatrixXd x(n, total + 1);
  u.leftCols(tau) = forward.controls.inputs.leftCols(tau);
  u.middleCols(tau, horizon_b - tau_b) = backward.controls.inputs.rightCols(horizon_b - tau_b);
  x.leftCols(tau + 1) = forward.trajectory.states.leftCols(tau + 1);
  x.middleCols(tau + 1, horizon_b - tau_b) =
      backward.trajectory.states.rightCols(horizon_b - tau_b);
  if (total > joined) {
    const InputVector filler = constraint.project(rest.size() ? rest : InputVector::Zero(m));
    u.rightCols(total - joined) = filler.replicate(1, total - joined);
    x.rightCols(total - joined) = x_goal.replicate(1, total - joined);
  }

  GuideReference ref;
  ref.controls = ControlSequence(std::move(u));
  ref.states = StateTrajectory(std::move(x));
  ref.junction = junction;
  ref.effective_horizon = joined;
  return ref;
}

std::vector<GuideReference> associate(const Model& model, const BranchSet& forward,
                                      const BranchSet& backward, const StateVector& x_goal,
                                      int min_horizon, const InputConstraint& constraint) {
  if (forward.size() == 0 || backward.size() == 0) {
    throw std::invalid_argument("associate: both branch sets must be non-empty");
  }
  std::vector<GuideReference> refs(static_cast<std::size_t>(forward.size()));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < forward.size(); ++i) {
    const auto& fwd = forward.branches[static_cast<std::size_t>(i)];
    Junction junction = nearest_junction(model, fwd.trajectory, backward);
    junction.forward_branch = i;
    refs[static_cast<std::size_t>(i)] =
        concatenate(fwd, backward.branches[static_cast<std::size_t>(junction.backward_branch)],
                    junction, x_goal, min_horizon, constraint, model.rest_input());
  }
  return refs;
}

CostFunction make_guide_cost(const RolloutProblem& problem, const GuideReference& reference,
                             const StateVector& x_goal, const BicSettings& settings) {
  const Model& model = *problem.model;
  const StateConstraint& sc = problem.state_constraint;
  const CostModel base = make_cost_model(settings, x_goal);
  const GuideWeights w = settings.guide;
  const int effective = reference.effective_horizon;
  const PositionVector goal_pos = model.position(x_goal);
  return [&model, &sc, &reference, base, w, effective, goal_pos](const StateTrajectory& traj,
                                                                 const ControlSequence& u) {
    RolloutCost cost = evaluate_cost(model, traj, u, base, sc, Direction::kForward);
    if (cost.collided) return cost;
    double state_dev = 0.0;
    for (int t = 0; t <= traj.horizon(); ++t) {
      state_dev += (model.position(traj.at(t)) - model.position(reference.states.at(t))).squaredNorm();
    }
    double input_dev = 0.0;
    if (w.lambda_u != 0.0) input_dev = (u.inputs - reference.controls.inputs).squaredNorm();
    const double goal = (model.position(traj.at(effective)) - goal_pos).norm() / w.eps_goal;
    cost.value += w.lambda_x * state_dev + w.lambda_u * input_dev + goal;
    return cost;
  };
}

std::optional<ControlSequence> guide_mppi(const RolloutProblem& problem,
                                          const GuideReference& reference,
                                          const StateVector& x_init, const StateVector& x_goal,
                                          const BicSettings& settings, std::uint64_t seed) {
  const NoiseSpec noise{settings.noise_variance, settings.gamma, seed};
  const CostFunction cost = make_guide_cost(problem, reference, x_goal, settings);
  const RolloutBatch batch = sample_batch(problem, reference.controls, noise,
                                          settings.samples_guide, x_init, Direction::kForward, cost);
  if (batch.valid_count() == 0) return std::nullopt;
  const auto idx = batch.all_indices();
  return weighted_average(batch, idx, settings.gamma, problem.input_constraint);
}

int select_candidate(const std::vector<RolloutCost>& costs) { return argmin_cost(costs); }

BicStepResult bic_mppi_step(const RolloutProblem& problem, const ControlSequence& forward_initial,
                            const ControlSequence& backward_initial, const StateVector& x_init,
                            const StateVector& x_goal, const BicSettings& settings,
                            std::uint64_t seed) {
  const BranchSet forward = forward_cluster(problem, forward_initial, x_init, x_goal, settings,
                                            derive_seed(seed, {1}));
  const BranchSet backward = backward_cluster(problem, backward_initial, x_goal, x_init, settings,
                                              derive_seed(seed, {2}));

  std::vector<GuideReference> refs = associate(*problem.model, forward, backward, x_goal,
                                               forward_initial.horizon(), problem.input_constraint);
  if (settings.max_candidates > 0 && static_cast<int>(refs.size()) > settings.max_candidates) {
    // Keep the lowest-cost forward branches; collided branches sort last.
    std::vector<int> order(refs.size());
    std::iota(order.begin(), order.end(), 0);
    const auto key = [&](int i) {
      const auto& c = forward.branches[static_cast<std::size_t>(i)].cost;
      return std::pair{c.collided, c.collided ? 0.0 : c.value};
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    order.resize(static_cast<std::size_t>(settings.max_candidates));
    std::sort(order.begin(), order.end());
    std::vector<GuideReference> kept;
    kept.reserve(order.size());
    for (int i : order) kept.push_back(std::move(refs[static_cast<std::size_t>(i)]));
    refs = std::move(kept);
  }

  BicStepResult result;
  auto& diag = result.diagnostics;
  diag.forward_branches = forward.size();
  diag.backward_branches = backward.size();
  diag.candidate_costs.assign(refs.size(), RolloutCost::collision());

  const int horizon_f = forward_initial.horizon();
  const CostModel forward_cost = make_cost_model(settings, x_goal);
  std::vector<std::optional<ControlSequence>> guided(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    diag.junctions.push_back(refs[i].junction);
    guided[i] = guide_mppi(problem, refs[i], x_init, x_goal, settings,
                           derive_seed(seed, {3, static_cast<std::uint64_t>(i)}));
    if (!guided[i]) continue;
    const ControlSequence head = guided[i]->prefix(horizon_f);
    try {
      const auto traj = rollout(*problem.model, x_init, head, Direction::kForward, problem.dt);
      diag.candidate_costs[i] = evaluate_cost(*problem.model, traj, head, forward_cost,
                                              problem.state_constraint, Direction::kForward);
    } catch (const NumericError&) {
      diag.candidate_costs[i] = {0.0, true, true};
    }
  }

  const int best = select_candidate(diag.candidate_costs);
  if (best < 0) {
    throw PlannerStepError(StepFailure::kAllCandidatesCollided,
                           "every guided candidate collided within the forward horizon");
  }
  diag.selected_candidate = best;
  const auto sb = static_cast<std::size_t>(best);
  result.control = std::move(*guided[sb]);
  result.backward_warm_start =
      backward.branches[static_cast<std::size_t>(refs[sb].junction.backward_branch)].controls;
  return result;
}

}  // namespace bicmppi
