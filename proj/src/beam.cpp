#include "hflow/beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hflow/errors.hpp"

namespace hflow {

void BeamConfig::validate() const {
  if (!(lambda >= 10.0)) throw ConfigError("beam.lambda must be at least 10");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("beam.alpha must lie in [0, 1)");
  if (!(tube_exponent > 0.0)) throw ConfigError("beam.tube_exponent must be positive");
}

double BeamConfig::cutoff_radius() const { return std::pow(lambda, -tube_exponent); }

namespace {

struct HessianBlocks {
  Mat2 xx, xp, pp;
};

HessianBlocks blocks(const Medium& medium, const Vec2& x, const Vec2& p, RiccatiForm form) {
  const HamiltonianDerivatives d = medium.derivatives(x, p, 2);
  if (form == RiccatiForm::hamiltonian) return {d.xx, d.xp, d.pp};
  // H~ = 2 mu |p|^2
  const Jet2 mu = medium.inverse_metric(x, 2);
  const double p2 = p.squaredNorm();
  return {2.0 * mu.hess * p2, 4.0 * mu.grad * p.transpose(), 4.0 * mu.value * Mat2::Identity()};
}

CMat2 riccati_from_blocks(const HessianBlocks& b, const CMat2& m) {
  const CMat2 xp = b.xp.cast<std::complex<double>>();
  CMat2 r = -(m * b.pp.cast<std::complex<double>>() * m + xp * m + m * xp.transpose() +
              b.xx.cast<std::complex<double>>());
  return 0.5 * (r + r.transpose());
}

struct BeamPoint {
  Vec2 x, p;
  CMat2 m;
  double phase;
  std::complex<double> log_a;
};

struct BeamRate {
  Vec2 dx, dp;
  CMat2 dm;
  double dphase;
  std::complex<double> dlog_a;
};

BeamRate beam_rhs(const Medium& medium, const BeamConfig& cfg, const BeamPoint& y) {
  const HamiltonianDerivatives d = medium.derivatives(y.x, y.p, 2);
  BeamRate r;
  r.dx = d.p;
  r.dp = -d.x;
  r.dm = riccati_from_blocks(blocks(medium, y.x, y.p, cfg.riccati), y.m);
  r.dphase = y.p.dot(r.dx);
  r.dlog_a = -d.inverse_metric * y.m.trace() - cfg.alpha * d.n2;
  return r;
}

BeamPoint advance(const BeamPoint& y, const BeamRate& k, double h) {
  return {y.x + h * k.dx, y.p + h * k.dp, y.m + h * k.dm, y.phase + h * k.dphase, y.log_a + h * k.dlog_a};
}

} // namespace

CMat2 riccati_rhs(const Medium& medium, const Vec2& x, const Vec2& p, const CMat2& m, RiccatiForm form) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw ContractViolation("riccati_rhs: M is not symmetric");
  }
  return riccati_from_blocks(blocks(medium, x, p, form), m);
}

CMat2 default_initial_hessian(const Vec2& xdot, const Vec2& pdot) {
  const double v2 = xdot.squaredNorm();
  const Mat2 proj = Mat2::Identity() - xdot * xdot.transpose() / v2;
  const Mat2 real = (pdot * xdot.transpose() + xdot * pdot.transpose()) / v2 -
                    xdot.dot(pdot) * xdot * xdot.transpose() / (v2 * v2);
  CMat2 m0;
  m0.real() = real;
  m0.imag() = proj;
  return m0;
}

void check_initial_hessian(const CMat2& m0, const Vec2& xdot, const Vec2& pdot, double tol) {
  if ((m0 - m0.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
    throw ContractViolation("initial Hessian is not symmetric");
  }
  const CVec2 lhs = m0 * xdot.cast<std::complex<double>>();
  if ((lhs - pdot.cast<std::complex<double>>()).norm() > tol * (1.0 + pdot.norm())) {
    throw ContractViolation("initial Hessian violates M0 x'(0) = p'(0)");
  }
  const Vec2 t = perp<double>(xdot).normalized();
  if (!(t.dot(m0.imag() * t) > 0.0)) {
    throw ContractViolation("Im M0 is not positive definite on x'(0)^perp");
  }
}

BeamState propagate_beam(const RayPath& ray, const BeamConfig& config, const Medium& medium) {
  config.validate();
  if (ray.samples.size() < 2) throw ContractViolation("propagate_beam: ray has fewer than two samples");

  BeamState state;
  state.ray = ray;
  state.config = config;
  state.samples.reserve(ray.samples.size());

  const RaySample& first = ray.samples.front();
  const HamiltonianDerivatives d0 = medium.derivatives(first.x, first.p, 1);
  const CMat2 m0 = config.initial_hessian ? *config.initial_hessian : default_initial_hessian(d0.p, -d0.x);
  check_initial_hessian(m0, d0.p, -d0.x);
  state.config.initial_hessian = m0;

  BeamPoint y{first.x, first.p, m0, 0.0, std::log(config.initial_amplitude)};
  state.min_transverse_imag = std::numeric_limits<double>::infinity();

  auto record = [&](double s, const BeamPoint& pt) {
    const BeamRate r = beam_rhs(medium, config, pt);
    BeamSample smp;
    smp.s = s;
    smp.x = pt.x;
    smp.p = pt.p;
    smp.xdot = r.dx;
    smp.pdot = r.dp;
    smp.m = pt.m;
    smp.mdot = r.dm;
    smp.phase = pt.phase;
    smp.phase_dot = r.dphase;
    smp.log_amplitude = pt.log_a;
    smp.log_amplitude_dot = r.dlog_a;

    state.max_asymmetry = std::max(state.max_asymmetry, (pt.m - pt.m.transpose()).cwiseAbs().maxCoeff());
    const CVec2 mx = pt.m * r.dx.cast<std::complex<double>>();
    state.max_constraint_error = std::max(
        state.max_constraint_error, (mx - r.dp.cast<std::complex<double>>()).norm() / (1.0 + r.dp.norm()));
    const Vec2 t = perp<double>(r.dx).normalized();
    const double im = t.dot(pt.m.imag() * t);
    state.min_transverse_imag = std::min(state.min_transverse_imag, im);
    if (!(im > 0.0)) {
      std::ostringstream os;
      os << "beam breakdown: Im M lost positivity on x'^perp at s = " << s;
      throw BeamBreakdownError(os.str(), s);
    }
    state.samples.push_back(smp);
  };

  record(first.s, y);
  for (std::size_t k = 0; k + 1 < ray.samples.size(); ++k) {
    const double h = ray.samples[k + 1].s - ray.samples[k].s;
    const BeamRate k1 = beam_rhs(medium, config, y);
    const BeamRate k2 = beam_rhs(medium, config, advance(y, k1, 0.5 * h));
    const BeamRate k3 = beam_rhs(medium, config, advance(y, k2, 0.5 * h));
    const BeamRate k4 = beam_rhs(medium, config, advance(y, k3, h));
    y.x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    y.p += h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    y.m += h / 6.0 * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm);
    y.m = 0.5 * (y.m + y.m.transpose()).eval();
    y.phase += h / 6.0 * (k1.dphase + 2.0 * k2.dphase + 2.0 * k3.dphase + k4.dphase);
    y.log_a += h / 6.0 * (k1.dlog_a + 2.0 * k2.dlog_a + 2.0 * k3.dlog_a + k4.dlog_a);
    record(ray.samples[k + 1].s, y);
  }
  return state;
}

} // namespace hflow
