#include <doctest.h>

#include <cmath>

#include "hflow/errors.hpp"
#include "hflow/fan.hpp"
#include "hflow/ray.hpp"

using namespace hflow;

namespace {

const Domain kDisk = Domain::disk(Vec2::Zero(), 1.0);

Medium flat() { return Medium(kDisk, ScalarField::constant(1.0)); }

Medium bumpy() {
  return Medium(kDisk, ScalarField::bumps(1.0, {{Vec2(0.1, 0.05), 0.3, 0.05}}, BoundaryBlend{kDisk, 0.1}));
}

SourceDirection source(double theta, double angle) {
  SourceDirection s;
  const BoundaryPoint b = kDisk.boundary_point(theta);
  s.x0 = b.point;
  s.omega0 = Eigen::Rotation2Dd(angle) * b.inward_normal;
  s.theta = theta;
  s.angle = angle;
  return s;
}

// Fourth-order central difference of H along direction e in x or p.
double dh(const Medium& m, const Vec2& x, const Vec2& p, const Vec2& ex, const Vec2& ep) {
  const double h = 1e-4;
  auto H = [&](double t) { return m.hamiltonian(x + t * ex, p + t * ep); };
  return (-H(2 * h) + 8 * H(h) - 8 * H(-h) + H(-2 * h)) / (12 * h);
}

} // namespace

TEST_CASE("rhs in a constant medium") {
  const PhaseVelocity v = hamiltonian_rhs(flat(), Vec2(0.2, 0.3), Vec2(1, 0));
  CHECK((v.dx - Vec2(2, 0)).norm() == 0.0);
  CHECK(v.dp.norm() == 0.0);
}

TEST_CASE("rhs vanishes in p at a bump peak") {
  const Medium m(kDisk, ScalarField::bumps(1.0, {{Vec2(0.1, 0.05), 0.3, 0.05}}));
  CHECK(hamiltonian_rhs(m, Vec2(0.1, 0.05), Vec2(0.3, 0.7)).dp.norm() < 1e-15);
}

TEST_CASE("rhs with a conformal metric matches Hamilton's equations by finite differences") {
  const ScalarField c = ScalarField::bumps(1.0, {{Vec2(-0.1, 0.2), 0.3, 0.4}}, BoundaryBlend{kDisk, 0.1});
  const Medium m(kDisk, ScalarField::bumps(1.0, {{Vec2(0.2, -0.1), 0.25, 0.3}}), Metric::conformal(c));
  const Vec2 x(0.05, 0.1), p(0.6, -0.8);
  const PhaseVelocity v = hamiltonian_rhs(m, x, p);
  for (int i = 0; i < 2; ++i) {
    const Vec2 e = Vec2::Unit(i);
    CHECK(std::abs(v.dx(i) - dh(m, x, p, Vec2::Zero(), e)) < 1e-10);
    CHECK(std::abs(v.dp(i) + dh(m, x, p, e, Vec2::Zero())) < 1e-10);
  }
}

TEST_CASE("diameter ray in a constant medium") {
  SourceDirection s;
  s.x0 = Vec2(-1, 0);
  s.omega0 = Vec2(1, 0);
  const RayPath r = trace(s, flat());
  CHECK(std::abs(r.tau - 1.0) < 1e-10);
  CHECK((r.exit_point - Vec2(1, 0)).norm() < 1e-10);
  CHECK(std::abs(kDisk.rho(r.exit_point)) < 1e-10);
}

TEST_CASE("60 degree chord") {
  const RayPath r = trace(source(kPi, kPi / 3), flat());
  CHECK(std::abs(r.tau - 0.5) < 1e-10);
}

TEST_CASE("exit time table over launch angles") {
  std::vector<SourceDirection> fan;
  for (int k = 0; k < 32; ++k) fan.push_back(source(0.3, -1.4 + 2.8 * k / 31));
  const auto taus = exit_time_table(fan, flat());
  for (int k = 0; k < 32; ++k) CHECK(std::abs(taus[k] - std::cos(fan[k].angle)) < 1e-8);
}

TEST_CASE("normal incidence fan has unit exit times") {
  const auto fan = sample_inward_sphere(kDisk, 12, 1);
  for (double t : exit_time_table(fan, flat())) CHECK(std::abs(t - 1.0) < 1e-10);
}

TEST_CASE("straight rays have no sagitta") {
  const RayPath r = trace(source(1.0, 0.7), flat());
  const Vec2 a = r.samples.front().x, d = (r.exit_point - a).normalized();
  double sag = 0.0;
  for (const auto& s : r.samples) sag = std::max(sag, std::abs(perp<double>(d).dot(s.x - a)));
  CHECK(sag < 1e-10);
}

TEST_CASE("samples are ordered and interior") {
  const RayPath r = trace(source(2.0, 0.4), bumpy());
  for (std::size_t k = 1; k < r.samples.size(); ++k) {
    CHECK(r.samples[k].s > r.samples[k - 1].s);
    CHECK(r.samples[k].s - r.samples[k - 1].s <= 1e-3 + 1e-15);
    if (k + 1 < r.samples.size()) CHECK(kDisk.rho(r.samples[k].x) < 0.0);
  }
}

TEST_CASE("energy is conserved in a bump medium") {
  const Medium m = bumpy();
  const auto fan = sample_inward_sphere(kDisk, 16, 4, FanOptions{kPi / 3, 0.05, energy_shell_speed(m)});
  for (const RayPath& r : trace_fan(fan, m)) {
    CHECK(std::abs(r.energy0) < 1e-12);
    CHECK(r.max_energy_drift < 1e-8);
  }
}

TEST_CASE("bump medium matches a fine-step oracle") {
  const Medium m = bumpy();
  const SourceDirection s = source(0.4, 0.3);
  TraceOptions fine;
  fine.step = 1e-5;
  const RayPath oracle = trace(s, m, fine);
  const RayPath r = trace(s, m);
  CHECK(std::abs(r.tau - oracle.tau) < 1e-7);
  CHECK((r.exit_point - oracle.exit_point).norm() < 1e-7);
}

TEST_CASE("RK4 exit error shrinks at fourth order") {
  const Medium m(kDisk, ScalarField::bumps(1.0, {{Vec2(0.1, 0.05), 0.3, 0.4}}, BoundaryBlend{kDisk, 0.1}));
  const SourceDirection s = source(0.4, 0.3);
  TraceOptions o;
  o.drift_tolerance = 1e-3;
  o.step = 1e-4;
  const Vec2 ref = trace(s, m, o).exit_point;
  o.step = 1e-2;
  const double e1 = (trace(s, m, o).exit_point - ref).norm();
  o.step = 5e-3;
  const double e2 = (trace(s, m, o).exit_point - ref).norm();
  CHECK(e1 / e2 >= 14.0);
}

TEST_CASE("reversed ray returns to the source") {
  const Medium m = bumpy();
  const SourceDirection s = source(1.1, -0.5);
  const RayPath fwd = trace(s, m);
  const RayPath back = trace_from(fwd.exit_point, -fwd.exit_momentum, m);
  CHECK((back.exit_point - s.x0).norm() < 1e-6);
}

TEST_CASE("initial momentum lies on the zero energy shell") {
  const Medium m(kDisk, ScalarField::constant(2.25));
  SourceDirection s = source(0.0, 0.2);
  s.omega0 *= 3.0;
  const Vec2 p = initial_momentum(m, s);
  CHECK(std::abs(p.norm() - 1.5) < 1e-14);
  CHECK(std::abs(m.hamiltonian(s.x0, p)) < 1e-14);
}

TEST_CASE("trapping guard") {
  TraceOptions o;
  o.max_parameter_factor = 0.1;
  CHECK_THROWS_AS(trace(source(0.0, 0.0), flat(), o), TrappedRayError);
}
