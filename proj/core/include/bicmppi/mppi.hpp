#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bicmppi/constraints.hpp"
#include "bicmppi/dynamics.hpp"
#include "bicmppi/types.hpp"

namespace bicmppi {

/// Zero-mean Gaussian input noise with diagonal covariance.
struct NoiseSpec {
  InputVector variance;  // diagonal of Sigma_u
  double gamma = 10.0;   // inverse temperature
  std::uint64_t seed = 0;

  void validate() const;
};

/// Rollout cost; a collided rollout carries no finite value.
struct RolloutCost {
  double value = 0.0;
  bool collided = false;
  bool numeric_failure = false;

  static RolloutCost collision() { return {0.0, true, false}; }

  friend bool operator==(const RolloutCost&, const RolloutCost&) = default;
};

/// Terminal distance to `target`, quadratic input effort and, optionally, the
/// distance to `target` summed over every state. The target is the goal for
/// forward rollouts and the initial state for backward ones.
struct CostModel {
  double terminal_weight = 50.0;
  InputVector stage_input_weight;  // empty means zero
  StateVector target;
  double stage_position_weight = 0.0;
};

/// Everything a rollout needs besides the nominal inputs and the anchor state.
struct RolloutProblem {
  std::shared_ptr<const Model> model;
  InputConstraint input_constraint;
  StateConstraint state_constraint;
  double dt = 0.1;
};

using CostFunction = std::function<RolloutCost(const StateTrajectory&, const ControlSequence&)>;

struct RolloutBatch {
  std::vector<Eigen::MatrixXd> noises;         // m x T each, before projection
  std::vector<ControlSequence> inputs;         // projected
  std::vector<StateTrajectory> trajectories;
  std::vector<RolloutCost> costs;

  int size() const { return static_cast<int>(costs.size()); }
  std::vector<int> all_indices() const;
  int valid_count() const;
};

RolloutCost evaluate_cost(const Model& model, const StateTrajectory& trajectory,
                          const ControlSequence& controls, const CostModel& cost_model,
                          const StateConstraint& state_constraint, Direction direction);

/**
 * Draws `samples` perturbations of `base`, projects each step onto the input
 * set, rolls them out from `x_start` and scores them with `cost`.
 *
 * Sample k draws its noise from its own substream derive_seed(noise.seed, {k}),
 * so the batch is identical for any OpenMP thread count.
 */
RolloutBatch sample_batch(const RolloutProblem& problem, const ControlSequence& base,
                          const NoiseSpec& noise, int samples, const StateVector& x_start,
                          Direction direction, const CostFunction& cost);

RolloutBatch sample_batch(const RolloutProblem& problem, const ControlSequence& base,
                          const NoiseSpec& noise, int samples, const StateVector& x_start,
                          Direction direction, const CostModel& cost_model);

/// Softmax-weighted mean of the inputs in `indices`, with the minimum cost of
/// the subset subtracted before exponentiation. Collided samples get weight 0.
/// Throws NoValidSampleError if every member collided.
ControlSequence weighted_average(const RolloutBatch& batch, std::span<const int> indices,
                                 double gamma);

/// As above, then projects each step onto `clip`. The mean of feasible inputs
/// is feasible in exact arithmetic; this removes the last-ulp overshoot.
ControlSequence weighted_average(const RolloutBatch& batch, std::span<const int> indices,
                                 double gamma, const InputConstraint& clip);

/// Normalized weights used by weighted_average, aligned with `indices`.
std::vector<double> softmax_weights(const RolloutBatch& batch, std::span<const int> indices,
                                    double gamma);

struct MppiSettings {
  NoiseSpec noise;
  int samples = 1024;
  CostModel cost;
};

/// One vanilla MPPI iteration over all samples; horizon = base.horizon().
ControlSequence vanilla_mppi_step(const RolloutProblem& problem, const ControlSequence& base,
                                  const StateVector& x_init, const MppiSettings& settings);

/// Drops u_0 and appends the projection of `rest` (the zero input when empty).
ControlSequence warm_start_shift(const ControlSequence& previous,
                                 const InputConstraint& constraint,
                                 const InputVector& rest = InputVector());

}  // namespace bicmppi
