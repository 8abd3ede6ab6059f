#include "hflow/ray.hpp"

#include <cmath>
#include <sstream>

#include "hflow/errors.hpp"
#include "hflow/parallel.hpp"

namespace hflow {

PhaseVelocity hamiltonian_rhs(const Medium& medium, const Vec2& x, const Vec2& p) {
  const HamiltonianDerivatives d = medium.derivatives(x, p, 1);
  return {d.p, -d.x};
}

Vec2 initial_momentum(const Medium& medium, const SourceDirection& src) {
  const double n2 = medium.n2(src.x0, 0).value;
  const double mu = medium.inverse_metric(src.x0, 0).value;
  if (!(n2 > 0.0)) throw ContractViolation("n^2 must be positive at the source");
  // mu |p|^2 = n^2
  return std::sqrt(n2 / mu) * src.omega0.normalized();
}

RaySample rk4_step(const Medium& medium, const RaySample& state, double h) {
  const PhaseVelocity k1 = hamiltonian_rhs(medium, state.x, state.p);
  const PhaseVelocity k2 = hamiltonian_rhs(medium, state.x + 0.5 * h * k1.dx, state.p + 0.5 * h * k1.dp);
  const PhaseVelocity k3 = hamiltonian_rhs(medium, state.x + 0.5 * h * k2.dx, state.p + 0.5 * h * k2.dp);
  const PhaseVelocity k4 = hamiltonian_rhs(medium, state.x + h * k3.dx, state.p + h * k3.dp);
  RaySample next;
  next.s = state.s + h;
  next.x = state.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  next.p = state.p + h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  return next;
}

RayPath trace_from(const Vec2& x0, const Vec2& p0, const Medium& medium, const TraceOptions& options) {
  const Domain& domain = medium.domain();
  const double h = options.step;
  const double s_max = options.max_parameter_factor * domain.diameter();

  RayPath ray;
  ray.energy0 = medium.hamiltonian(x0, p0);
  ray.samples.reserve(static_cast<std::size_t>(4.0 * domain.diameter() / h) + 8);
  ray.samples.push_back({0.0, x0, p0});

  RaySample cur = ray.samples.back();
  while (true) {
    if (cur.s > s_max) {
      std::ostringstream os;
      os << "ray exceeded the maximum flow parameter " << s_max << " (trapped)";
      throw TrappedRayError(os.str());
    }
    RaySample next = rk4_step(medium, cur, h);
    if (domain.rho(next.x) < 0.0) {
      ray.samples.push_back(next);
      cur = next;
      continue;
    }
    // Bisection on the fraction of the last step.
    double lo = 0.0;
    double hi = 1.0;
    RaySample exit = next;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      RaySample trial = rk4_step(medium, cur, mid * h);
      const double r = domain.rho(trial.x);
      exit = trial;
      if (std::abs(r) < options.exit_tol) break;
      (r < 0.0 ? lo : hi) = mid;
    }
    ray.samples.push_back(exit);
    break;
  }

  ray.tau = ray.samples.back().s;
  ray.exit_point = ray.samples.back().x;
  ray.exit_momentum = ray.samples.back().p;
  for (const auto& smp : ray.samples) {
    ray.max_energy_drift = std::max(ray.max_energy_drift, std::abs(medium.hamiltonian(smp.x, smp.p) - ray.energy0));
  }
  if (ray.max_energy_drift > options.drift_tolerance * (1.0 + std::abs(ray.energy0))) {
    std::ostringstream os;
    os << "energy drift " << ray.max_energy_drift << " exceeds tolerance";
    throw IntegrationError(os.str());
  }
  return ray;
}

RayPath trace(const SourceDirection& src, const Medium& medium, const TraceOptions& options) {
  return trace_from(src.x0, initial_momentum(medium, src), medium, options);
}

std::vector<RayPath> trace_fan(std::span<const SourceDirection> fan, const Medium& medium,
                               const TraceOptions& options) {
  std::vector<RayPath> rays(fan.size());
  parallel_for(static_cast<int>(fan.size()), [&](int i) {
    try {
      rays[static_cast<std::size_t>(i)] = trace(fan[static_cast<std::size_t>(i)], medium, options);
    } catch (const TrappedRayError& e) {
      std::ostringstream os;
      os << "source (" << fan[i].theta_index << ", " << fan[i].dir_index << "): " << e.what();
      throw TrappedRayError(os.str());
    } catch (const Error& e) {
      std::ostringstream os;
      os << "source (" << fan[i].theta_index << ", " << fan[i].dir_index << "): " << e.what();
      throw IntegrationError(os.str());
    }
  });
  return rays;
}

std::vector<double> exit_time_table(std::span<const SourceDirection> fan, const Medium& medium,
                                    const TraceOptions& options) {
  const auto rays = trace_fan(fan, medium, options);
  std::vector<double> taus(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i) taus[i] = rays[i].tau;
  return taus;
}

} // namespace hflow
