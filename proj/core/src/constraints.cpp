#include "bicmppi/constraints.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bicmppi {

InputConstraint InputConstraint::box(InputVector lower, InputVector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("box constraint: bound dimensions differ");
  }
  if (!(lower.array() <= upper.array()).all()) {
    throw std::invalid_argument("box constraint: lower must be <= upper");
  }
  return InputConstraint(BoxSet{std::move(lower), std::move(upper)});
}

InputConstraint InputConstraint::norm_cone(double a_max, double theta_max) {
  if (!(a_max > 0.0)) throw std::invalid_argument("norm cone: a_max must be positive");
  if (!(theta_max > 0.0 && theta_max < 0.5 * std::numbers::pi)) {
    throw std::invalid_argument("norm cone: theta_max must lie in (0, pi/2)");
  }
  return InputConstraint(NormConeSet{a_max, theta_max});
}

int InputConstraint::dim() const {
  if (const auto* b = std::get_if<BoxSet>(&set_)) return static_cast<int>(b->lower.size());
  return 3;
}

InputVector project_onto_cone(const InputVector& u, double half_angle) {
  const int m = static_cast<int>(u.size());
  const double alpha = std::tan(half_angle);
  const double z = u(m - 1);
  const double s = u.head(m - 1).norm();
  if (s <= alpha * z) return u;
  if (alpha * s <= -z) return InputVector::Zero(m);
  // Nearest point on the boundary ray through the direction of u's lateral part.
  const double scale = (alpha * s + z) / (1.0 + alpha * alpha);
  InputVector p(m);
  p.head(m - 1) = u.head(m - 1) * (alpha * scale / s);
  p(m - 1) = scale;
  return p;
}

InputVector InputConstraint::project(const InputVector& u) const {
  if (const auto* b = std::get_if<BoxSet>(&set_)) {
    return u.cwiseMax(b->lower).cwiseMin(b->upper);
  }
  const auto& c = std::get<NormConeSet>(set_);
  const int m = static_cast<int>(u.size());
  const double alpha = std::tan(c.theta_max);
  const auto inside = [&](const InputVector& v) {
    return v.head(m - 1).norm() <= alpha * v(m - 1) && v.norm() <= c.a_max;
  };
  if (inside(u)) return u;
  // Cone projection followed by radial clamp is the exact projection onto
  // the intersection of a cone with an origin-centred ball.
  InputVector p = project_onto_cone(u, c.theta_max);
  const double norm = p.norm();
  if (norm > c.a_max) p *= c.a_max / norm;
  // Rounding can leave p a few ulps outside; pull the lateral part in so a
  // second projection is the identity.
  for (int k = 0; k < 64 && !inside(p); ++k) {
    if (p.head(m - 1).norm() > 0.0) {
      p.head(m - 1) *= 1.0 - std::numeric_limits<double>::epsilon();
    } else {
      p(m - 1) = std::nextafter(p(m - 1), 0.0);
    }
  }
  return p;
}

bool InputConstraint::contains(const InputVector& u, double tol) const {
  if (const auto* b = std::get_if<BoxSet>(&set_)) {
    return (u.array() >= b->lower.array() - tol).all() && (u.array() <= b->upper.array() + tol).all();
  }
  const auto& c = std::get<NormConeSet>(set_);
  const double norm = u.norm();
  return norm <= c.a_max + tol && norm * std::cos(c.theta_max) <= u(2) + tol;
}

void InputConstraint::project_sequence(ControlSequence& controls) const {
  for (int t = 0; t < controls.horizon(); ++t) {
    controls.inputs.col(t) = project(controls.inputs.col(t));
  }
}

bool StateConstraint::violated(const Model& model, const StateVector& x) const {
  if (grid_ && grid_->is_colliding(model.position(x))) return true;
  if (bounds_) {
    if ((x.array() < bounds_->lower.array()).any() || (x.array() > bounds_->upper.array()).any()) {
      return true;
    }
  }
  return false;
}

}  // namespace bicmppi
