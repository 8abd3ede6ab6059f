#include "hflow/transform.hpp"

#include <algorithm>
#include <cmath>

#include "hflow/errors.hpp"
#include "hflow/parallel.hpp"

namespace hflow {

std::vector<double> simpson_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) {
    const double h = nodes[1] - nodes[0];
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  std::size_t k = 0;
  for (; k + 2 < n; k += 2) {
    const double h0 = nodes[k + 1] - nodes[k];
    const double h1 = nodes[k + 2] - nodes[k + 1];
    const double hs = h0 + h1;
    w[k] += hs / 6.0 * (2.0 - h1 / h0);
    w[k + 1] += hs * hs * hs / (6.0 * h0 * h1);
    w[k + 2] += hs / 6.0 * (2.0 - h0 / h1);
  }
  if (k + 1 < n) {
    const double a = nodes[n - 2] - nodes[n - 3];
    const double b = nodes[n - 1] - nodes[n - 2];
    w[n - 3] += -b * b * b / (6.0 * a * (a + b));
    w[n - 2] += b * (3.0 * a + b) / (6.0 * a);
    w[n - 1] += b * (3.0 * a + 2.0 * b) / (6.0 * (a + b));
  }
  return w;
}

double EnergyConvention::time_scale() const { return form == EnergyForm::potential ? std::sqrt(2.0) : 1.0; }

ScalarField EnergyConvention::beam_n2(const ScalarField& q) const {
  if (form == EnergyForm::beam) {
    if (H0 != 0.0) throw ContractViolation("beam convention is defined at H0 = 0");
    return q.scaled(-1.0);
  }
  return q.scaled(-1.0).shifted(H0);
}

namespace {

std::vector<double> parameters(const RayPath& ray) {
  std::vector<double> s(ray.samples.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = ray.samples[k].s;
  return s;
}

} // namespace

double integrate_along(const RayPath& ray, const std::function<double(const Vec2&)>& f, double time_scale) {
  const std::vector<double> w = simpson_weights(parameters(ray));
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f(ray.samples[k].x);
  return time_scale * acc;
}

Sinogram flow_transform(const ScalarField& f, const std::vector<SourceDirection>& fan, const Medium& medium,
                        const EnergyConvention& conv, const TraceOptions& options) {
  return flow_transform(f, fan, trace_fan(fan, medium, options), conv);
}

Sinogram flow_transform(const ScalarField& f, const std::vector<SourceDirection>& fan, const std::vector<RayPath>& rays,
                        const EnergyConvention& conv) {
  if (fan.size() != rays.size()) throw ContractViolation("flow_transform: fan and rays differ in size");
  Sinogram out;
  out.fan = fan;
  out.convention = conv;
  out.values.resize(rays.size());
  out.taus.resize(rays.size());
  const double scale = conv.time_scale();
  parallel_for(static_cast<int>(rays.size()), [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    out.values[k] = integrate_along(rays[k], [&](const Vec2& x) { return f.value(x); }, scale);
    out.taus[k] = rays[k].tau;
  });
  return out;
}

RayMatrix ray_matrix(const std::vector<RayPath>& rays, const PixelGrid& grid, double time_scale) {
  std::vector<std::vector<Eigen::Triplet<double>>> per_ray(rays.size());
  parallel_for(static_cast<int>(rays.size()), [&](int r) {
    const RayPath& ray = rays[static_cast<std::size_t>(r)];
    const std::vector<double> w = simpson_weights(parameters(ray));
    std::vector<std::pair<int, double>> bw;
    auto& trips = per_ray[static_cast<std::size_t>(r)];
    for (std::size_t k = 0; k < w.size(); ++k) {
      grid.bilinear(ray.samples[k].x, bw);
      for (const auto& [col, wb] : bw) trips.emplace_back(r, col, time_scale * w[k] * wb);
    }
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& t : per_ray) all.insert(all.end(), t.begin(), t.end());
  RayMatrix a(static_cast<Eigen::Index>(rays.size()), grid.unknowns());
  a.setFromTriplets(all.begin(), all.end());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd backproject(const RayMatrix& a, const Eigen::VectorXd& sigma) {
  if (sigma.size() != a.rows()) throw ContractViolation("backproject: sinogram size does not match the ray matrix");
  return a.transpose() * sigma;
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

struct ShellData {
  std::vector<double> s, sigma, dsigma;
  std::vector<Vec2> x, xdot;
};

ShellData shell_data(const RayPath& ray, const Medium& medium) {
  const std::size_t n = ray.samples.size();
  if (n < 3) throw ContractViolation("maupertuis: ray has fewer than three samples");
  ShellData d;
  d.s.resize(n);
  d.sigma.assign(n, 0.0);
  d.dsigma.resize(n);
  d.x.resize(n);
  d.xdot.resize(n);
  std::vector<double> ddsigma(n);
  for (std::size_t k = 0; k < n; ++k) {
    const RaySample& r = ray.samples[k];
    const Jet2 n2 = medium.n2(r.x, 1);
    if (!(n2.value > 0.0)) {
      throw ContractViolation("energy convention violated: H0 - q <= 0 on the ray at s = " + std::to_string(r.s));
    }
    const PhaseVelocity v = hamiltonian_rhs(medium, r.x, r.p);
    d.s[k] = r.s;
    d.x[k] = r.x;
    d.xdot[k] = v.dx;
    d.dsigma[k] = 2.0 * kSqrt2 * n2.value;
    ddsigma[k] = 2.0 * kSqrt2 * n2.grad.dot(v.dx);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = d.s[k + 1] - d.s[k];
    d.sigma[k + 1] = d.sigma[k] + 0.5 * h * (d.dsigma[k] + d.dsigma[k + 1]) + h * h / 12.0 * (ddsigma[k] - ddsigma[k + 1]);
  }
  return d;
}

struct Hermite {
  double h00, h10, h01, h11, d00, d10, d01, d11;
  Hermite(double t, double h) {
    const double t2 = t * t, t3 = t2 * t;
    h00 = 2 * t3 - 3 * t2 + 1;
    h10 = (t3 - 2 * t2 + t) * h;
    h01 = -2 * t3 + 3 * t2;
    h11 = (t3 - t2) * h;
    d00 = (6 * t2 - 6 * t) / h;
    d10 = 3 * t2 - 4 * t + 1;
    d01 = (-6 * t2 + 6 * t) / h;
    d11 = 3 * t2 - 2 * t;
  }
};

} // namespace

MaupertuisCurve maupertuis_reparametrize(const RayPath& ray, const Medium& medium, int nodes) {
  const ShellData d = shell_data(ray, medium);
  const std::size_t n = d.s.size();
  if (nodes <= 0) nodes = static_cast<int>(n | 1u);
  if (nodes < 3) nodes = 3;
  if (nodes % 2 == 0) ++nodes;

  MaupertuisCurve c;
  c.length = d.sigma.back();
  c.time_scale = kSqrt2;
  const double dsig = c.length / (nodes - 1);
  for (int j = 0; j < nodes; ++j) {
    const double target = j == nodes - 1 ? c.length : j * dsig;
    auto it = std::upper_bound(d.sigma.begin(), d.sigma.end(), target);
    std::size_t k = it == d.sigma.begin() ? 0 : static_cast<std::size_t>(it - d.sigma.begin()) - 1;
    k = std::min(k, n - 2);
    const double h = d.s[k + 1] - d.s[k];
    double t = (target - d.sigma[k]) / std::max(d.sigma[k + 1] - d.sigma[k], 1e-300);
    for (int it_n = 0; it_n < 50; ++it_n) {
      const Hermite b(t, h);
      const double g = b.h00 * d.sigma[k] + b.h10 * d.dsigma[k] + b.h01 * d.sigma[k + 1] + b.h11 * d.dsigma[k + 1] - target;
      const double dg = (b.d00 * d.sigma[k] + b.d10 * d.dsigma[k] + b.d01 * d.sigma[k + 1] + b.d11 * d.dsigma[k + 1]) * h;
      const double step = g / dg;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const Hermite b(t, h);
    const Vec2 x = b.h00 * d.x[k] + b.h10 * d.xdot[k] + b.h01 * d.x[k + 1] + b.h11 * d.xdot[k + 1];
    const Vec2 xs = b.d00 * d.x[k] + b.d10 * d.xdot[k] + b.d01 * d.x[k + 1] + b.d11 * d.xdot[k + 1];
    const double big_n = medium.n2(x, 0).value;
    const double conformal = 1.0 / medium.inverse_metric(x, 0).value;
    const double speed = std::sqrt(2.0 * big_n * conformal) * xs.norm() / (2.0 * kSqrt2 * big_n);
    c.sigma.push_back(target);
    c.s.push_back(d.s[k] + t * h);
    c.x.push_back(x);
    c.speed.push_back(speed);
    c.max_speed_error = std::max(c.max_speed_error, std::abs(speed - 1.0));
  }
  return c;
}

EquivalenceCheck weighted_equivalence_check(const std::function<double(const Vec2&)>& f, const RayPath& ray,
                                            const Medium& medium, int nodes) {
  EquivalenceCheck out;
  out.lhs = integrate_along(ray, f, kSqrt2);
  const MaupertuisCurve c = maupertuis_reparametrize(ray, medium, nodes);
  const std::vector<double> w = simpson_weights(c.sigma);
  for (std::size_t j = 0; j < w.size(); ++j) out.rhs += w[j] * f(c.x[j]) / (2.0 * medium.n2(c.x[j], 0).value);
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

} // namespace hflow
