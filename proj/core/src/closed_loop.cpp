#include "bicmppi/closed_loop.hpp"

#include <chrono>
#include <stdexcept>
#include <vector>

#include "bicmppi/rng.hpp"

namespace bicmppi {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kMppi: return "mppi";
    case Algorithm::kClusterMppi: return "cluster-mppi";
    case Algorithm::kBicMppi: return "bic-mppi";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "mppi") return Algorithm::kMppi;
  if (name == "cluster-mppi") return Algorithm::kClusterMppi;
  if (name == "bic-mppi") return Algorithm::kBicMppi;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::kCollision: return "collision";
    case FailureReason::kMaxIterations: return "max_iterations";
    case FailureReason::kNoValidSamples: return "no_valid_samples";
    case FailureReason::kNoForwardSamples: return "no_forward_samples";
    case FailureReason::kNoBackwardSamples: return "no_backward_samples";
    case FailureReason::kAllCandidatesCollided: return "all_candidates_collided";
    case FailureReason::kNumericError: return "numeric_error";
  }
  return "unknown";
}

FailureReason parse_failure_reason(std::string_view name) {
  for (auto r : {FailureReason::kCollision, FailureReason::kMaxIterations,
                 FailureReason::kNoValidSamples, FailureReason::kNoForwardSamples,
                 FailureReason::kNoBackwardSamples, FailureReason::kAllCandidatesCollided,
                 FailureReason::kNumericError}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown failure reason '" + std::string(name) + "'");
}

void PlannerSettings::validate() const {
  if (noise_variance.size() == 0 || !(noise_variance.array() > 0.0).all()) {
    throw std::invalid_argument("sigma_u entries must be positive");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma_u must be positive");
  if (horizon_forward < 1) throw std::invalid_argument("t_f must be >= 1");
  if (samples_forward < 1) throw std::invalid_argument("n_f must be >= 1");
  if (!(terminal_weight >= 0.0)) throw std::invalid_argument("w_phi must be >= 0");
  if (!(stage_position_weight >= 0.0)) throw std::invalid_argument("w_stage must be >= 0");
  if (initial_input.size() != 0 && initial_input.size() != noise_variance.size()) {
    throw std::invalid_argument("initial_input dimension differs from sigma_u");
  }
  if (stage_input_weight.size() != 0 && stage_input_weight.size() != noise_variance.size()) {
    throw std::invalid_argument("stage_input_weight dimension differs from sigma_u");
  }
  if (algorithm != Algorithm::kMppi) dbscan.validate();
  if (algorithm == Algorithm::kBicMppi) {
    if (horizon_backward < 1) throw std::invalid_argument("t_b must be >= 1");
    if (samples_backward < 1 || samples_guide < 1) {
      throw std::invalid_argument("n_b and n_g must be >= 1");
    }
    if (!(guide.lambda_x >= 0.0) || !(guide.lambda_u >= 0.0)) {
      throw std::invalid_argument("lambda_x and lambda_u must be >= 0");
    }
    if (!(guide.eps_goal > 0.0)) throw std::invalid_argument("eps_goal must be positive");
    if (max_candidates < 0) throw std::invalid_argument("max_candidates must be >= 0");
  }
}

namespace {

ControlSequence initial_sequence(const PlannerSettings& s, const RolloutProblem& problem,
                                 int horizon) {
  const InputVector u = s.initial_input.size() ? s.initial_input : problem.model->rest_input();
  return ControlSequence::constant(problem.input_constraint.project(u), horizon);
}

MppiSettings mppi_settings(const PlannerSettings& s, const StateVector& x_goal,
                           std::uint64_t seed) {
  return MppiSettings{NoiseSpec{s.noise_variance, s.gamma, seed}, s.samples_forward,
                      CostModel{s.terminal_weight, s.stage_input_weight, x_goal,
                                s.stage_position_weight}};
}

class MppiPlanner final : public Planner {
 public:
  MppiPlanner(const PlannerSettings& s, const RolloutProblem& problem, const StateVector& goal)
      : settings_(s), problem_(problem), goal_(goal),
        warm_(initial_sequence(s, problem, s.horizon_forward)) {}

  ControlSequence plan(const StateVector& x, std::uint64_t seed) override {
    ControlSequence u = vanilla_mppi_step(problem_, warm_, x, mppi_settings(settings_, goal_, seed));
    warm_ = warm_start_shift(u, problem_.input_constraint, problem_.model->rest_input());
    return u;
  }

 private:
  PlannerSettings settings_;
  const RolloutProblem& problem_;
  StateVector goal_;
  ControlSequence warm_;
};

class ClusterMppiPlanner final : public Planner {
 public:
  ClusterMppiPlanner(const PlannerSettings& s, const RolloutProblem& problem,
                     const StateVector& goal)
      : settings_(s), problem_(problem), goal_(goal),
        warm_(initial_sequence(s, problem, s.horizon_forward)) {}

  ControlSequence plan(const StateVector& x, std::uint64_t seed) override {
    const ClusterMppiSettings cs{mppi_settings(settings_, goal_, seed), settings_.dbscan};
    ControlSequence u = cluster_mppi_step(problem_, warm_, x, cs).control;
    warm_ = warm_start_shift(u, problem_.input_constraint, problem_.model->rest_input());
    return u;
  }

 private:
  PlannerSettings settings_;
  const RolloutProblem& problem_;
  StateVector goal_;
  ControlSequence warm_;
};

class BicPlanner final : public Planner {
 public:
  BicPlanner(const PlannerSettings& s, const RolloutProblem& problem, const StateVector& goal)
      : problem_(problem), goal_(goal),
        forward_(initial_sequence(s, problem, s.horizon_forward)),
        backward_(initial_sequence(s, problem, s.horizon_backward)) {
    bic_.noise_variance = s.noise_variance;
    bic_.gamma = s.gamma;
    bic_.horizon_forward = s.horizon_forward;
    bic_.horizon_backward = s.horizon_backward;
    bic_.samples_forward = s.samples_forward;
    bic_.samples_backward = s.samples_backward;
    bic_.samples_guide = s.samples_guide;
    bic_.dbscan = s.dbscan;
    bic_.terminal_weight = s.terminal_weight;
    bic_.stage_input_weight = s.stage_input_weight;
    bic_.stage_position_weight = s.stage_position_weight;
    bic_.guide = s.guide;
    bic_.max_candidates = s.max_candidates;
  }

  ControlSequence plan(const StateVector& x, std::uint64_t seed) override {
    BicStepResult r = bic_mppi_step(problem_, forward_, backward_, x, goal_, bic_, seed);
    forward_ = warm_start_shift(r.control.prefix(bic_.horizon_forward), problem_.input_constraint,
                                problem_.model->rest_input());
    backward_ = std::move(r.backward_warm_start);
    return std::move(r.control);
  }

 private:
  BicSettings bic_;
  const RolloutProblem& problem_;
  StateVector goal_;
  ControlSequence forward_;
  ControlSequence backward_;
};

FailureReason reason_of(StepFailure f) {
  switch (f) {
    case StepFailure::kNoForwardSamples: return FailureReason::kNoForwardSamples;
    case StepFailure::kNoBackwardSamples: return FailureReason::kNoBackwardSamples;
    case StepFailure::kAllCandidatesCollided: return FailureReason::kAllCandidatesCollided;
  }
  return FailureReason::kNoValidSamples;
}

}  // namespace

std::unique_ptr<Planner> make_planner(const PlannerSettings& settings, const RolloutProblem& problem,
                                      const StateVector& x_goal) {
  settings.validate();
  if (settings.noise_variance.size() != problem.model->input_dim()) {
    throw std::invalid_argument("sigma_u dimension differs from the model input dimension");
  }
  switch (settings.algorithm) {
    case Algorithm::kMppi: return std::make_unique<MppiPlanner>(settings, problem, x_goal);
    case Algorithm::kClusterMppi:
      return std::make_unique<ClusterMppiPlanner>(settings, problem, x_goal);
    case Algorithm::kBicMppi: return std::make_unique<BicPlanner>(settings, problem, x_goal);
  }
  throw std::invalid_argument("unknown algorithm");
}

TrialResult closed_loop_drive(const PlannerSettings& settings, const RolloutProblem& problem,
                              const StateVector& x_init, const StateVector& x_goal,
                              const TrialOptions& options) {
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(options.err > 0.0)) throw std::invalid_argument("err must be positive");
  const Model& model = *problem.model;
  std::unique_ptr<Planner> planner = make_planner(settings, problem, x_goal);
  const PositionVector goal = model.position(x_goal);

  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  std::vector<StateVector> executed{x_init};
  StateVector x = x_init;

  for (int iter = 0;; ++iter) {
    result.iterations = iter;
    result.terminal_error = (model.position(x) - goal).norm();
    if (result.terminal_error < options.err) {
      result.success = true;
      break;
    }
    if (iter == options.max_iters) {
      result.failure_reason = FailureReason::kMaxIterations;
      break;
    }

    std::optional<ControlSequence> plan;
    for (int retry = 0; retry <= options.step_retries && !plan; ++retry) {
      const std::uint64_t seed = derive_seed(
          options.seed, {static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(retry)});
      try {
        plan = planner->plan(x, seed);
      } catch (const PlannerStepError& e) {
        result.failure_reason = reason_of(e.reason());
      } catch (const NoValidSampleError&) {
        result.failure_reason = FailureReason::kNoValidSamples;
      } catch (const NumericError&) {
        result.failure_reason = FailureReason::kNumericError;
      }
    }
    if (!plan) break;
    result.failure_reason.reset();

    const InputVector u0 = plan->at(0);
    const InputVector u1 = plan->horizon() > 1 ? plan->at(1) : u0;
    try {
      x = rk4_forward(model, x, u0, u1, problem.dt);
    } catch (const NumericError&) {
      result.failure_reason = FailureReason::kNumericError;
      break;
    }
    executed.push_back(x);
    if (problem.state_constraint.violated(model, x)) {
      result.iterations = iter + 1;
      result.terminal_error = (model.position(x) - goal).norm();
      result.failure_reason = FailureReason::kCollision;
      break;
    }
  }

  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Eigen::MatrixXd states(x_init.size(), static_cast<Eigen::Index>(executed.size()));
  for (std::size_t i = 0; i < executed.size(); ++i) states.col(static_cast<Eigen::Index>(i)) = executed[i];
  result.executed = StateTrajectory(std::move(states));
  return result;
}

}  // namespace bicmppi
