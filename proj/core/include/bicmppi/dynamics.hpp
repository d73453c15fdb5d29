#pragma once

#include <memory>
#include <string>

#include "bicmppi/types.hpp"

namespace bicmppi {

/// Continuous-time model x' = F(x, u) with a position map p(x).
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int position_dim() const = 0;

  virtual StateVector derivative(const StateVector& x, const InputVector& u) const = 0;
  virtual PositionVector position(const StateVector& x) const = 0;

  /// Input that keeps the velocity constant; fills padded and shifted tails.
  virtual InputVector rest_input() const { return InputVector::Zero(input_dim()); }
};

/// Unicycle: state (x, y, theta), input (v, w).
class DiffDrive final : public Model {
 public:
  std::string name() const override { return "diffdrive"; }
  int state_dim() const override { return 3; }
  int input_dim() const override { return 2; }
  int position_dim() const override { return 2; }

  StateVector derivative(const StateVector& x, const InputVector& u) const override;
  PositionVector position(const StateVector& x) const override { return x.head(2); }
};

/// Point mass: state (p, v) in R^6, input acceleration a in R^3, gravity along -z.
class PointMassQuadrotor final : public Model {
 public:
  static constexpr double kGravity = 9.81;

  std::string name() const override { return "quadrotor"; }
  int state_dim() const override { return 6; }
  int input_dim() const override { return 3; }
  int position_dim() const override { return 3; }

  StateVector derivative(const StateVector& x, const InputVector& u) const override;
  PositionVector position(const StateVector& x) const override { return x.head(3); }
  InputVector rest_input() const override;
};

std::shared_ptr<const Model> make_model(const std::string& name);

/// Wraps an angle to (-pi, pi]. Only used when comparing states.
double wrap_angle(double angle);

/// One RK4 step from x_t using u_t at the start, u_next at the end and their
/// mean at the two midpoint stages.
StateVector rk4_forward(const Model& model, const StateVector& x, const InputVector& u,
                        const InputVector& u_next, double dt);

/// Predecessor state of x_t: the RK4 stages run with negated offsets, u_t at
/// x_t, u_prev at the far end and their mean at the midpoint stages.
StateVector rk4_backward(const Model& model, const StateVector& x, const InputVector& u,
                         const InputVector& u_prev, double dt);

/// T+1 states driven by `controls`. Forward rollouts anchor index 0 at
/// x_start; backward rollouts anchor index T and fill towards 0. The input
/// past the end is taken equal to the last input.
StateTrajectory rollout(const Model& model, const StateVector& x_start,
                        const ControlSequence& controls, Direction direction, double dt);

}  // namespace bicmppi
