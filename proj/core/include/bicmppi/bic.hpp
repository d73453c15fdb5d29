#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bicmppi/clustering.hpp"
#include "bicmppi/mppi.hpp"

namespace bicmppi {

/// Cluster-averaged controls from one direction, each rolled out from its
/// anchor (x_init forward, x_goal backward) and scored.
struct Branch {
  ControlSequence controls;
  StateTrajectory trajectory;
  RolloutCost cost;
};

struct BranchSet {
  Direction direction = Direction::kForward;
  std::vector<Branch> branches;
  bool fallback = false;  // DBSCAN found no cluster
  int valid_samples = 0;

  int size() const { return static_cast<int>(branches.size()); }
};

/// Nearest pair between forward branch `forward_branch` at `forward_cut` and
/// backward branch `backward_branch` at `backward_cut`.
struct Junction {
  int forward_branch = -1;
  int backward_branch = -1;
  int forward_cut = 0;
  int backward_cut = 0;
  double distance = 0.0;

  friend bool operator==(const Junction&, const Junction&) = default;
};

/**
 * Forward prefix joined to a backward suffix at a junction.
 *
 * controls = forward u_{0..cut-1} followed by backward u_{cut'..T_b-1};
 * states   = forward x_{0..cut} followed by backward x_{cut'+1..T_b}.
 * effective_horizon counts the joined inputs before padding; when it is
 * shorter than the forward horizon the tail is padded with the zero input
 * and copies of x_goal.
 */
struct GuideReference {
  ControlSequence controls;
  StateTrajectory states;
  Junction junction;
  int effective_horizon = 0;
};

struct GuideWeights {
  double lambda_x = 1.0;  // per-step squared position deviation
  double lambda_u = 0.0;  // per-step squared input deviation
  double eps_goal = 0.01; // goal term is distance / eps_goal; +inf disables it
};

struct BicSettings {
  InputVector noise_variance;
  double gamma = 10.0;
  int horizon_forward = 50;
  int horizon_backward = 50;
  int samples_forward = 512;
  int samples_backward = 512;
  int samples_guide = 512;
  DbscanParams dbscan;
  double terminal_weight = 50.0;
  InputVector stage_input_weight;
  double stage_position_weight = 0.0;
  GuideWeights guide;
  // Upper bound on guided candidates (lowest-cost forward branches kept);
  // 0 keeps every forward branch.
  int max_candidates = 0;
};

enum class StepFailure { kNoForwardSamples, kNoBackwardSamples, kAllCandidatesCollided };

std::string to_string(StepFailure failure);

class PlannerStepError : public std::runtime_error {
 public:
  PlannerStepError(StepFailure reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  StepFailure reason() const { return reason_; }

 private:
  StepFailure reason_;
};

BranchSet forward_cluster(const RolloutProblem& problem, const ControlSequence& initial,
                          const StateVector& x_init, const StateVector& x_goal,
                          const BicSettings& settings, std::uint64_t seed);

/// Mirror of forward_cluster: backward RK4 from x_goal, terminal cost on the
/// distance of x_0 to x_init.
BranchSet backward_cluster(const RolloutProblem& problem, const ControlSequence& initial,
                           const StateVector& x_goal, const StateVector& x_init,
                           const BicSettings& settings, std::uint64_t seed);

/// Exhaustive search over (backward branch, forward cut, backward cut) for the
/// smallest position distance; ties resolve to the lexicographically smallest
/// triple.
Junction nearest_junction(const Model& model, const StateTrajectory& forward,
                          const BranchSet& backward);

/// Padding inputs are the projection of `rest` (the zero input when empty).
GuideReference concatenate(const Branch& forward, const Branch& backward, const Junction& junction,
                           const StateVector& x_goal, int min_horizon,
                           const InputConstraint& constraint,
                           const InputVector& rest = InputVector());

/// One reference per forward branch.
std::vector<GuideReference> associate(const Model& model, const BranchSet& forward,
                                      const BranchSet& backward, const StateVector& x_goal,
                                      int min_horizon, const InputConstraint& constraint);

/// Cost of a forward rollout under the guide: the ordinary terminal/stage/
/// indicator cost over the reference horizon, plus time-aligned deviation
/// from the reference and the goal term at the effective horizon.
CostFunction make_guide_cost(const RolloutProblem& problem, const GuideReference& reference,
                             const StateVector& x_goal, const BicSettings& settings);

/// One MPPI pass warm-started at the reference controls. Empty when every
/// sample collided.
std::optional<ControlSequence> guide_mppi(const RolloutProblem& problem,
                                          const GuideReference& reference,
                                          const StateVector& x_init, const StateVector& x_goal,
                                          const BicSettings& settings, std::uint64_t seed);

struct BicDiagnostics {
  int forward_branches = 0;
  int backward_branches = 0;
  std::vector<Junction> junctions;
  std::vector<RolloutCost> candidate_costs;  // forward-horizon cost of each guided output
  int selected_candidate = -1;
};

struct BicStepResult {
  ControlSequence control;              // guided output, horizon >= horizon_forward
  ControlSequence backward_warm_start;  // backward branch joined to the selected candidate
  BicDiagnostics diagnostics;
};

/// Candidate with the lowest forward cost; ties to the lowest index.
int select_candidate(const std::vector<RolloutCost>& costs);

/// Bidirectional clustered generation, association, guided refinement and
/// selection. Throws PlannerStepError when a stage has nothing to work with.
BicStepResult bic_mppi_step(const RolloutProblem& problem, const ControlSequence& forward_initial,
                            const ControlSequence& backward_initial, const StateVector& x_init,
                            const StateVector& x_goal, const BicSettings& settings,
                            std::uint64_t seed);

}  // namespace bicmppi
