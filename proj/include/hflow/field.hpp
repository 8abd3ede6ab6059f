#pragma once

#include <optional>
#include <vector>

#include "hflow/domain.hpp"
#include "hflow/jet.hpp"

namespace hflow {

struct GaussianBump {
  Vec2 center = Vec2::Zero();
  double width = 1.0;
  double amplitude = 0.0;
};

/// Taper that forces a perturbation to vanish within `margin` of the boundary
/// and leaves it untouched deeper than 2 * margin.
struct BoundaryBlend {
  Domain domain;
  double margin = 0.1;
};

/// Tensor-product cubic spline through values on a regular grid
/// (not-a-knot end conditions, so interpolation error is O(h^4) up to the
/// edges). Evaluation needs one cell of clearance from the grid edge.
class GridSpline {
 public:
  GridSpline() = default;
  /// `values` is row-major with x fastest: values[j * nx + i] = f(origin + (i, j) h).
  GridSpline(Vec2 origin, double spacing, int nx, int ny, std::vector<double> values);

  Jet2 evaluate(const Vec2& x, int order) const;

  const Vec2& origin() const { return origin_; }
  double spacing() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const std::vector<double>& values() const { return f_; }

 private:
  Vec2 origin_ = Vec2::Zero();
  double h_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> f_, fxx_, fyy_, fxxyy_;
};

enum class FieldKind { constant, gaussian_bump_sum, gridded };

/// Smooth coefficient field (n^2, a potential, or a conformal factor).
/// Immutable after construction, safe for concurrent evaluation.
class ScalarField {
 public:
  static ScalarField constant(double c);
  static ScalarField bumps(double base, std::vector<GaussianBump> bumps,
                           std::optional<BoundaryBlend> blend = std::nullopt);
  static ScalarField gridded(GridSpline spline);

  /// Sample `f` on a grid covering `box` with spacing h (plus margin cells).
  static ScalarField sampled(const ScalarField& f, const Box& box, double h, int margin_cells = 3);

  FieldKind kind() const { return kind_; }
  double base() const { return base_; }
  const std::vector<GaussianBump>& bump_list() const { return bumps_; }
  const std::optional<BoundaryBlend>& blend() const { return blend_; }
  const GridSpline& spline() const { return spline_; }

  Jet2 evaluate(const Vec2& x, int order = 3) const;
  double value(const Vec2& x) const { return evaluate(x, 0).value; }

  /// f + c (the blend only applies to the bump part, so this keeps it).
  ScalarField shifted(double c) const;
  /// f scaled by c, including the base value.
  ScalarField scaled(double c) const;
  /// Bump-sum fields only: bases added and bump lists concatenated.
  static ScalarField sum(const ScalarField& a, const ScalarField& b);

 private:
  FieldKind kind_ = FieldKind::constant;
  double base_ = 0.0;
  std::vector<GaussianBump> bumps_;
  std::optional<BoundaryBlend> blend_;
  GridSpline spline_;
};

/// C^3 step: 0 for t <= 0, 1 for t >= 1 (degree 7 smoothstep).
Jet2 smooth_step(const Jet2& t);

} // namespace hflow
