#pragma once

#include <string>

#include "hflow/jet.hpp"
#include "hflow/types.hpp"

namespace hflow {

enum class DomainKind { disk, ellipse, smoothed_polygon };

struct BoundaryPoint {
  Vec2 point;
  Vec2 inward_normal;
};

struct Box {
  Vec2 lower;
  Vec2 upper;
};

/// Strictly convex planar domain M described by a boundary defining function
/// rho (negative inside, zero on the boundary, unit gradient there).
///
/// Boundary parameter theta runs over [0, 2pi). For the disk and the ellipse
/// it is the usual trigonometric parametrization; for the smoothed polygon it
/// is the polar angle seen from the center.
class Domain {
 public:
  static Domain disk(Vec2 center, double radius);
  static Domain ellipse(Vec2 center, Vec2 semi_axes);
  /// Regular polygon with the given apothem whose corners are rounded by a
  /// log-sum-exp of the edge half-planes. Larger `sharpness` gives sharper
  /// corners; the result stays strictly convex for any finite value.
  static Domain smoothed_polygon(Vec2 center, double apothem, int sides, double sharpness);

  DomainKind kind() const { return kind_; }
  const Vec2& center() const { return center_; }
  const Vec2& semi_axes() const { return axes_; }
  int sides() const { return sides_; }
  double sharpness() const { return sharpness_; }

  /// Characteristic radius (smallest semi-axis or apothem).
  double radius() const;
  double diameter() const;

  double rho(const Vec2& x) const;
  Vec2 rho_gradient(const Vec2& x) const;

  /// Smooth lower bound on dist(x, boundary) for interior points, with
  /// derivatives through third order. Used to taper coefficient fields.
  Jet2 depth(const Vec2& x) const;

  BoundaryPoint boundary_point(double theta) const;

  bool contains(const Vec2& x) const { return rho(x) < 0.0; }
  /// Membership in M' (M inflated by `margin_fraction` of its radius).
  bool in_extended(const Vec2& x, double margin_fraction = 0.2) const;

  Box bounding_box() const;

  /// Boundary parameter of the boundary point closest in angle to x.
  double parameter_of(const Vec2& boundary_x) const;

 private:
  double polygon_level(const Vec2& x, Vec2* grad, Mat2* hess) const;

  DomainKind kind_ = DomainKind::disk;
  Vec2 center_ = Vec2::Zero();
  Vec2 axes_ = Vec2::Ones();
  int sides_ = 0;
  double sharpness_ = 0.0;
};

} // namespace hflow
