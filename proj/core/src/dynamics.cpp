#include "bicmppi/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bicmppi {

StateVector DiffDrive::derivative(const StateVector& x, const InputVector& u) const {
  StateVector dx(3);
  dx << u(0) * std::cos(x(2)), u(0) * std::sin(x(2)), u(1);
  return dx;
}

StateVector PointMassQuadrotor::derivative(const StateVector& x, const InputVector& u) const {
  StateVector dx(6);
  dx << x(3), x(4), x(5), u(0), u(1), u(2) - kGravity;
  return dx;
}

InputVector PointMassQuadrotor::rest_input() const { return Eigen::Vector3d(0.0, 0.0, kGravity); }

std::shared_ptr<const Model> make_model(const std::string& name) {
  if (name == "diffdrive") return std::make_shared<DiffDrive>();
  if (name == "quadrotor") return std::make_shared<PointMassQuadrotor>();
  throw std::invalid_argument("unknown model '" + name + "'");
}

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

namespace {

StateVector rk4(const Model& model, const StateVector& x, const InputVector& u_start,
                const InputVector& u_end, double dt, double sign) {
  const InputVector u_mid = 0.5 * (u_start + u_end);
  const StateVector k1 = dt * model.derivative(x, u_start);
  const StateVector k2 = dt * model.derivative(x + sign * 0.5 * k1, u_mid);
  const StateVector k3 = dt * model.derivative(x + sign * 0.5 * k2, u_mid);
  const StateVector k4 = dt * model.derivative(x + sign * k3, u_end);
  StateVector next = x + sign * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  if (!next.allFinite()) throw NumericError("non-finite state in RK4 step");
  return next;
}

}  // namespace

StateVector rk4_forward(const Model& model, const StateVector& x, const InputVector& u,
                        const InputVector& u_next, double dt) {
  return rk4(model, x, u, u_next, dt, 1.0);
}

StateVector rk4_backward(const Model& model, const StateVector& x, const InputVector& u,
                         const InputVector& u_prev, double dt) {
  return rk4(model, x, u, u_prev, dt, -1.0);
}

StateTrajectory rollout(const Model& model, const StateVector& x_start,
                        const ControlSequence& controls, Direction direction, double dt) {
  const int horizon = controls.horizon();
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  if (x_start.size() != model.state_dim() || controls.input_dim() != model.input_dim()) {
    throw std::invalid_argument("rollout: dimension mismatch with model " + model.name());
  }
  Eigen::MatrixXd states(model.state_dim(), horizon + 1);
  const auto& u = controls.inputs;
  if (direction == Direction::kForward) {
    StateVector x = x_start;
    states.col(0) = x;
    for (int t = 0; t < horizon; ++t) {
      const int next = std::min(t + 1, horizon - 1);
      x = rk4_forward(model, x, u.col(t), u.col(next), dt);
      states.col(t + 1) = x;
    }
  } else {
    StateVector x = x_start;
    states.col(horizon) = x;
    for (int t = horizon; t >= 1; --t) {
      const int cur = std::min(t, horizon - 1);
      x = rk4_backward(model, x, u.col(cur), u.col(t - 1), dt);
      states.col(t - 1) = x;
    }
  }
  return StateTrajectory(std::move(states));
}

}  // namespace bicmppi
