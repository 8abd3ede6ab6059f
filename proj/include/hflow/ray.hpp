#pragma once

#include <span>
#include <vector>

#include "hflow/fan.hpp"
#include "hflow/medium.hpp"

namespace hflow {

struct PhaseVelocity {
  Vec2 dx;
  Vec2 dp;
};

/// Right-hand side of the ray equations for H = |p|_g^2 - n^2:
/// dx/ds = 2 g^{-1} p, dp/ds = -d_x(g^{jk}) p_j p_k + grad n^2.
PhaseVelocity hamiltonian_rhs(const Medium& medium, const Vec2& x, const Vec2& p);

struct RaySample {
  double s = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 p = Vec2::Zero();
};

/// Discretized H-geodesic. samples.front() is the source pose and
/// samples.back() the refined exit pose at s = tau.
struct RayPath {
  std::vector<RaySample> samples;
  double tau = 0.0;
  Vec2 exit_point = Vec2::Zero();
  Vec2 exit_momentum = Vec2::Zero();
  double energy0 = 0.0;
  double max_energy_drift = 0.0;
};

struct TraceOptions {
  double step = 1e-3;
  double exit_tol = 1e-10;
  double max_parameter_factor = 50.0;  // trapping guard, in units of the domain diameter
  double drift_tolerance = 1e-6;       // relative to 1 + |H0|
};

/// p(0) along omega0 with |p(0)|_g fixed by H(x0, p(0)) = 0, i.e. |p|_g = n(x0).
Vec2 initial_momentum(const Medium& medium, const SourceDirection& src);

/// One classical RK4 step of the ray equations.
RaySample rk4_step(const Medium& medium, const RaySample& state, double h);

/// Fixed-step RK4 until rho >= 0, then bisection of the last step down to
/// |rho| < exit_tol.
RayPath trace(const SourceDirection& src, const Medium& medium, const TraceOptions& options = {});
/// Trace from an explicit phase-space point (no energy normalization).
RayPath trace_from(const Vec2& x0, const Vec2& p0, const Medium& medium, const TraceOptions& options = {});

/// Rays of a whole fan, in fan order. A trapped or failed ray aborts with its
/// fan indices in the message.
std::vector<RayPath> trace_fan(std::span<const SourceDirection> fan, const Medium& medium,
                               const TraceOptions& options = {});
std::vector<double> exit_time_table(std::span<const SourceDirection> fan, const Medium& medium,
                                    const TraceOptions& options = {});

} // namespace hflow
