#include "hflow/fan.hpp"

#include <cmath>

#include "hflow/errors.hpp"

namespace hflow {

SpeedRule energy_shell_speed(const Medium& medium) {
  return [&medium](const Vec2& x) {
    const double n2 = medium.n2(x, 0).value;
    const double mu = medium.inverse_metric(x, 0).value;
    return std::sqrt(n2 / mu);
  };
}

std::vector<SourceDirection> sample_inward_sphere(const Domain& domain, int n_points, int n_dirs,
                                                  const FanOptions& options) {
  if (n_points < 1 || n_dirs < 1) throw ConfigError("fan needs at least one point and one direction");
  std::vector<SourceDirection> fan;
  fan.reserve(static_cast<std::size_t>(n_points) * n_dirs);
  for (int i = 0; i < n_points; ++i) {
    const double theta = 2.0 * kPi * i / n_points;
    const BoundaryPoint b = domain.boundary_point(theta);
    for (int j = 0; j < n_dirs; ++j) {
      const double angle =
          n_dirs == 1 ? 0.0 : -options.max_angle + 2.0 * options.max_angle * j / (n_dirs - 1);
      const Vec2 dir = std::cos(angle) * b.inward_normal + std::sin(angle) * perp<double>(b.inward_normal);
      if (dir.dot(b.inward_normal) < options.transversality) continue;
      SourceDirection s;
      s.x0 = b.point;
      s.omega0 = options.speed(b.point) * dir;
      s.theta_index = i;
      s.dir_index = j;
      s.theta = theta;
      s.angle = angle;
      fan.push_back(s);
    }
  }
  if (fan.empty()) throw ConfigError("fan is empty after transversality filtering");
  return fan;
}

} // namespace hflow
