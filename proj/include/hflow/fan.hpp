#pragma once

#include <functional>
#include <vector>

#include "hflow/domain.hpp"
#include "hflow/medium.hpp"

namespace hflow {

/// Boundary source (x0, omega0) with omega0 pointing into M.
struct SourceDirection {
  Vec2 x0 = Vec2::Zero();
  Vec2 omega0 = Vec2::UnitX();
  int theta_index = 0;
  int dir_index = 0;
  double theta = 0.0;  // boundary parameter of x0
  double angle = 0.0;  // signed angle between omega0 and the inward normal
};

/// Euclidean length assigned to omega0 at a boundary point.
using SpeedRule = std::function<double(const Vec2&)>;

inline double unit_speed(const Vec2&) { return 1.0; }

/// |omega0| on the zero-energy shell of H = |p|_g^2 - n^2.
SpeedRule energy_shell_speed(const Medium& medium);

struct FanOptions {
  double max_angle = kPi / 3.0;   // directions spread over [-max_angle, max_angle]
  double transversality = 0.05;   // minimum <inward normal, omega0 / |omega0|>
  SpeedRule speed = unit_speed;
};

/// Fan of inward sources: n_points equispaced boundary parameters times
/// n_dirs directions. Directions too close to grazing are dropped; an empty
/// fan is a configuration error.
std::vector<SourceDirection> sample_inward_sphere(const Domain& domain, int n_points, int n_dirs,
                                                  const FanOptions& options = {});

} // namespace hflow
