#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bicmppi {

// Upper bounds on model dimensions. Vectors below are dynamically sized but
// stack-allocated, so rollouts never touch the heap per step.
inline constexpr int kMaxStateDim = 8;
inline constexpr int kMaxInputDim = 4;
inline constexpr int kMaxPositionDim = 3;

using StateVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxStateDim, 1>;
using InputVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxInputDim, 1>;
using PositionVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxPositionDim, 1>;

enum class Direction { kForward, kBackward };

/// Time-indexed inputs u_0..u_{T-1}, stored one column per step (m x T).
struct ControlSequence {
  Eigen::MatrixXd inputs;

  ControlSequence() = default;
  explicit ControlSequence(Eigen::MatrixXd values) : inputs(std::move(values)) {}

  static ControlSequence zeros(int input_dim, int horizon) {
    return ControlSequence(Eigen::MatrixXd::Zero(input_dim, horizon));
  }
  static ControlSequence constant(const InputVector& u, int horizon) {
    return ControlSequence(u.replicate(1, horizon));
  }

  int horizon() const { return static_cast<int>(inputs.cols()); }
  int input_dim() const { return static_cast<int>(inputs.rows()); }
  InputVector at(int t) const { return inputs.col(t); }

  /// First `length` steps (length <= horizon).
  ControlSequence prefix(int length) const { return ControlSequence(inputs.leftCols(length)); }

  bool operator==(const ControlSequence& other) const {
    return inputs.rows() == other.inputs.rows() && inputs.cols() == other.inputs.cols() &&
           inputs == other.inputs;
  }
};

/// States x_0..x_T, one column per step (n x (T+1)).
struct StateTrajectory {
  Eigen::MatrixXd states;

  StateTrajectory() = default;
  explicit StateTrajectory(Eigen::MatrixXd values) : states(std::move(values)) {}

  int horizon() const { return static_cast<int>(states.cols()) - 1; }
  int state_dim() const { return static_cast<int>(states.rows()); }
  StateVector at(int t) const { return states.col(t); }
  StateVector front() const { return states.col(0); }
  StateVector back() const { return states.col(states.cols() - 1); }

  bool operator==(const StateTrajectory& other) const {
    return states.rows() == other.states.rows() && states.cols() == other.states.cols() &&
           states == other.states;
  }
};

/// Non-finite value produced during integration.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every sample in a batch (or index subset) hit the indicator.
class NoValidSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bicmppi
