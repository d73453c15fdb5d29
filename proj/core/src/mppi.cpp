#include "bicmppi/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "bicmppi/rng.hpp"

namespace bicmppi {

void NoiseSpec::validate() const {
  if (variance.size() == 0 || !(variance.array() > 0.0).all()) {
    throw std::invalid_argument("noise variance entries must be positive");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

std::vector<int> RolloutBatch::all_indices() const {
  std::vector<int> idx(static_cast<std::size_t>(size()));
  for (int k = 0; k < size(); ++k) idx[static_cast<std::size_t>(k)] = k;
  return idx;
}

int RolloutBatch::valid_count() const {
  return static_cast<int>(
      std::count_if(costs.begin(), costs.end(), [](const RolloutCost& c) { return !c.collided; }));
}

RolloutCost evaluate_cost(const Model& model, const StateTrajectory& trajectory,
                          const ControlSequence& controls, const CostModel& cost_model,
                          const StateConstraint& state_constraint, Direction direction) {
  for (int t = 0; t <= trajectory.horizon(); ++t) {
    if (state_constraint.violated(model, trajectory.at(t))) return RolloutCost::collision();
  }
  const StateVector end =
      direction == Direction::kForward ? trajectory.back() : trajectory.front();
  double cost =
      cost_model.terminal_weight * (model.position(end) - model.position(cost_model.target)).norm();
  if (cost_model.stage_input_weight.size() > 0) {
    const auto& w = cost_model.stage_input_weight;
    for (int t = 0; t < controls.horizon(); ++t) {
      cost += (w.array() * controls.inputs.col(t).array().square()).sum();
    }
  }
  if (cost_model.stage_position_weight != 0.0) {
    const PositionVector target = model.position(cost_model.target);
    double sum = 0.0;
    for (int t = 0; t <= trajectory.horizon(); ++t) {
      sum += (model.position(trajectory.at(t)) - target).norm();
    }
    cost += cost_model.stage_position_weight * sum;
  }
  return {cost, false, false};
}

RolloutBatch sample_batch(const RolloutProblem& problem, const ControlSequence& base,
                          const NoiseSpec& noise, int samples, const StateVector& x_start,
                          Direction direction, const CostFunction& cost) {
  if (samples < 1) throw std::invalid_argument("sample_batch: need at least one sample");
  noise.validate();
  const int m = base.input_dim();
  const int horizon = base.horizon();
  if (noise.variance.size() != m) throw std::invalid_argument("sample_batch: noise dimension");

  RolloutBatch batch;
  batch.noises.resize(static_cast<std::size_t>(samples));
  batch.inputs.resize(static_cast<std::size_t>(samples));
  batch.trajectories.resize(static_cast<std::size_t>(samples));
  batch.costs.resize(static_cast<std::size_t>(samples));
  const InputVector stddev = noise.variance.cwiseSqrt();

#pragma omp parallel for schedule(static)
  for (int k = 0; k < samples; ++k) {
    const auto slot = static_cast<std::size_t>(k);
    Rng rng(derive_seed(noise.seed, {static_cast<std::uint64_t>(k)}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd eps(m, horizon);
    for (int t = 0; t < horizon; ++t) {
      for (int i = 0; i < m; ++i) eps(i, t) = stddev(i) * normal(rng);
    }
    ControlSequence u(base.inputs + eps);
    problem.input_constraint.project_sequence(u);
    try {
      batch.trajectories[slot] = rollout(*problem.model, x_start, u, direction, problem.dt);
      batch.costs[slot] = cost(batch.trajectories[slot], u);
    } catch (const NumericError&) {
      batch.trajectories[slot] = StateTrajectory(
          Eigen::MatrixXd::Constant(x_start.size(), horizon + 1,
                                    std::numeric_limits<double>::quiet_NaN()));
      batch.costs[slot] = {0.0, true, true};
    }
    batch.noises[slot] = std::move(eps);
    batch.inputs[slot] = std::move(u);
  }
  return batch;
}

RolloutBatch sample_batch(const RolloutProblem& problem, const ControlSequence& base,
                          const NoiseSpec& noise, int samples, const StateVector& x_start,
                          Direction direction, const CostModel& cost_model) {
  const Model& model = *problem.model;
  const StateConstraint& sc = problem.state_constraint;
  return sample_batch(problem, base, noise, samples, x_start, direction,
                      [&](const StateTrajectory& traj, const ControlSequence& u) {
                        return evaluate_cost(model, traj, u, cost_model, sc, direction);
                      });
}

std::vector<double> softmax_weights(const RolloutBatch& batch, std::span<const int> indices,
                                    double gamma) {
  double baseline = std::numeric_limits<double>::infinity();
  for (int k : indices) {
    const auto& c = batch.costs[static_cast<std::size_t>(k)];
    if (!c.collided) baseline = std::min(baseline, c.value);
  }
  if (!std::isfinite(baseline)) {
    throw NoValidSampleError("weighted_average: every sample in the set collided");
  }
  std::vector<double> weights(indices.size(), 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < indices.size(); ++s) {
    const auto& c = batch.costs[static_cast<std::size_t>(indices[s])];
    if (c.collided) continue;
    weights[s] = std::exp(-gamma * (c.value - baseline));
    total += weights[s];
  }
  for (double& w : weights) w /= total;
  return weights;
}

ControlSequence weighted_average(const RolloutBatch& batch, std::span<const int> indices,
                                 double gamma) {
  if (indices.empty()) throw std::invalid_argument("weighted_average: empty index set");
  const std::vector<double> weights = softmax_weights(batch, indices, gamma);
  const auto& first = batch.inputs[static_cast<std::size_t>(indices[0])];
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(first.input_dim(), first.horizon());
  for (std::size_t s = 0; s < indices.size(); ++s) {
    if (weights[s] == 0.0) continue;
    out += weights[s] * batch.inputs[static_cast<std::size_t>(indices[s])].inputs;
  }
  return ControlSequence(std::move(out));
}

ControlSequence weighted_average(const RolloutBatch& batch, std::span<const int> indices,
                                 double gamma, const InputConstraint& clip) {
  ControlSequence out = weighted_average(batch, indices, gamma);
  clip.project_sequence(out);
  return out;
}

ControlSequence vanilla_mppi_step(const RolloutProblem& problem, const ControlSequence& base,
                                  const StateVector& x_init, const MppiSettings& settings) {
  const RolloutBatch batch = sample_batch(problem, base, settings.noise, settings.samples, x_init,
                                          Direction::kForward, settings.cost);
  const auto idx = batch.all_indices();
  return weighted_average(batch, idx, settings.noise.gamma, problem.input_constraint);
}

ControlSequence warm_start_shift(const ControlSequence& previous,
                                 const InputConstraint& constraint, const InputVector& rest) {
  const int horizon = previous.horizon();
  if (horizon < 1) throw std::invalid_argument("warm_start_shift: empty sequence");
  Eigen::MatrixXd next(previous.input_dim(), horizon);
  if (horizon > 1) next.leftCols(horizon - 1) = previous.inputs.rightCols(horizon - 1);
  next.col(horizon - 1) =
      constraint.project(rest.size() ? rest : InputVector::Zero(previous.input_dim()));
  return ControlSequence(std::move(next));
}

}  // namespace bicmppi
