#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <variant>

#include "bicmppi/dynamics.hpp"
#include "bicmppi/environment.hpp"
#include "bicmppi/types.hpp"

namespace bicmppi {

struct BoxSet {
  InputVector lower;
  InputVector upper;
};

/// {a : |a| <= a_max, |a| cos(theta_max) <= a_z}: thrust-cone intersected with a ball.
struct NormConeSet {
  double a_max;
  double theta_max;
};

/// Closed convex per-step input set with Euclidean projection.
class InputConstraint {
 public:
  static InputConstraint box(InputVector lower, InputVector upper);
  static InputConstraint norm_cone(double a_max, double theta_max);

  int dim() const;
  InputVector project(const InputVector& u) const;
  bool contains(const InputVector& u, double tol = 0.0) const;

  /// Projects every step of `controls` in place.
  void project_sequence(ControlSequence& controls) const;

  const std::variant<BoxSet, NormConeSet>& set() const { return set_; }

 private:
  explicit InputConstraint(std::variant<BoxSet, NormConeSet> set) : set_(std::move(set)) {}
  std::variant<BoxSet, NormConeSet> set_;
};

/// Projection onto the second-order cone {(y, z) : |y| <= tan(half_angle) z}
/// around the last coordinate.
InputVector project_onto_cone(const InputVector& u, double half_angle);

/// Optional per-dimension box on the state; infinite bounds disable a side.
struct StateBounds {
  StateVector lower;
  StateVector upper;
};

/// Obstacle region plus optional state box; `violated` is the indicator's
/// infinite branch.
class StateConstraint {
 public:
  StateConstraint() = default;
  explicit StateConstraint(std::shared_ptr<const OccupancyGrid> grid,
                           std::optional<StateBounds> bounds = std::nullopt)
      : grid_(std::move(grid)), bounds_(std::move(bounds)) {}

  bool violated(const Model& model, const StateVector& x) const;

  /// 0 when the state is admissible, +inf otherwise.
  double indicator(const Model& model, const StateVector& x) const {
    return violated(model, x) ? std::numeric_limits<double>::infinity() : 0.0;
  }

  const std::shared_ptr<const OccupancyGrid>& grid() const { return grid_; }
  const std::optional<StateBounds>& bounds() const { return bounds_; }

 private:
  std::shared_ptr<const OccupancyGrid> grid_;
  std::optional<StateBounds> bounds_;
};

}  // namespace bicmppi
