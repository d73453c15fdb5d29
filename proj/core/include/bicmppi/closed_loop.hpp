#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "bicmppi/bic.hpp"
#include "bicmppi/clustering.hpp"
#include "bicmppi/mppi.hpp"

namespace bicmppi {

enum class Algorithm { kMppi, kClusterMppi, kBicMppi };

std::string to_string(Algorithm algorithm);
/// Accepts "mppi", "cluster-mppi" and "bic-mppi"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(std::string_view name);

/// Parameters shared by all three planners. The backward and guide fields are
/// read by BiC-MPPI only, the DBSCAN fields by the two clustered planners.
struct PlannerSettings {
  Algorithm algorithm = Algorithm::kMppi;
  InputVector noise_variance;
  double gamma = 10.0;
  int horizon_forward = 100;
  int horizon_backward = 50;
  int samples_forward = 1024;
  int samples_backward = 1024;
  int samples_guide = 1024;
  DbscanParams dbscan;
  double terminal_weight = 50.0;
  InputVector stage_input_weight;
  double stage_position_weight = 0.0;
  GuideWeights guide;
  int max_candidates = 0;
  // Nominal input for the first iteration (projected); empty means the rest input.
  InputVector initial_input;

  void validate() const;
};

/// Receding-horizon planner holding its own warm starts.
class Planner {
 public:
  virtual ~Planner() = default;

  /// Optimizes from state `x` and returns the full optimized sequence.
  /// Warm starts advance only when the call succeeds.
  virtual ControlSequence plan(const StateVector& x, std::uint64_t seed) = 0;
};

std::unique_ptr<Planner> make_planner(const PlannerSettings& settings, const RolloutProblem& problem,
                                      const StateVector& x_goal);

enum class FailureReason {
  kCollision,
  kMaxIterations,
  kNoValidSamples,
  kNoForwardSamples,
  kNoBackwardSamples,
  kAllCandidatesCollided,
  kNumericError,
};

std::string to_string(FailureReason reason);
FailureReason parse_failure_reason(std::string_view name);

struct TrialOptions {
  int max_iters = 200;
  double err = 0.1;
  int step_retries = 2;  // fresh-noise replans after a failed step
  std::uint64_t seed = 0;
};

struct TrialResult {
  bool success = false;
  int iterations = 0;
  double wall_time_s = 0.0;
  double terminal_error = 0.0;  // position distance to the goal at the last state
  std::optional<FailureReason> failure_reason;
  StateTrajectory executed;  // iterations + 1 states
};

/// Plans, applies the first input through rk4_forward and replans until the
/// position error drops below `err`, the executed state collides, or the
/// iteration budget runs out.
TrialResult closed_loop_drive(const PlannerSettings& settings, const RolloutProblem& problem,
                              const StateVector& x_init, const StateVector& x_goal,
                              const TrialOptions& options);

}  // namespace bicmppi
