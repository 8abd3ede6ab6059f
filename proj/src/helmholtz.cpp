#include "hflow/helmholtz.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "hflow/parallel.hpp"

namespace hflow {

namespace {

using Quad = boost::multiprecision::float128;

/// (L_h U / U)(x) relative to the centre value; returns {re, im}.
std::complex<double> relative_residual(const BeamField& field, const Medium& medium, const Vec2& x, double h,
                                       FieldSample<double>& centre_out) {
  const Vector<Quad> xq = x.cast<Quad>();
  const FieldSample<Quad> c = field.evaluate<Quad>(xq);
  const Quad hq = Quad(h);
  Quad sum_re = 0, sum_im = 0;
  for (int axis = 0; axis < kDim; ++axis) {
    for (int sign : {-1, 1}) {
      Vector<Quad> xk = xq;
      xk(axis) += sign * hq;
      const FieldSample<Quad> f = field.evaluate<Quad>(xk);
      const Quad mag = exp(f.log_magnitude - c.log_magnitude) * f.cutoff / c.cutoff;
      const Quad dphi = f.phase - c.phase;
      sum_re += mag * cos(dphi) - 1;
      sum_im += mag * sin(dphi);
    }
  }
  centre_out.log_magnitude = static_cast<double>(c.log_magnitude);
  centre_out.cutoff = static_cast<double>(c.cutoff);
  centre_out.s = c.s;
  centre_out.distance = c.distance;

  const double mu = medium.inverse_metric(x, 0).value;
  const double n2 = medium.n2(x, 0).value;
  const double lambda = field.lambda();
  const double alpha = field.beam().config.alpha;
  const Quad h2 = hq * hq;
  const Quad re = Quad(mu) * sum_re / h2 + Quad(lambda) * Quad(lambda) * Quad(n2);
  const Quad im = Quad(mu) * sum_im / h2 + Quad(alpha * lambda * n2);
  return {static_cast<double>(re), static_cast<double>(im)};
}

} // namespace

ResidualResult helmholtz_residual(const BeamField& field, const Medium& medium, const ResidualOptions& options) {
  if (options.stations < 1 || options.transverse < 1) throw ContractViolation("helmholtz_residual: empty sampling");
  const auto& samples = field.beam().samples;
  const double tau = samples.back().s;
  const double lambda = field.lambda();
  const double half_width = options.tube_factor / std::sqrt(lambda);
  const double s0 = options.end_margin * tau;
  const double ds = (tau - 2.0 * s0) / options.stations;
  const double deta = 2.0 * half_width / options.transverse;
  const double h = options.step_factor / lambda;

  std::vector<double> station_sum(static_cast<std::size_t>(options.stations), 0.0);
  std::vector<double> station_field(static_cast<std::size_t>(options.stations), 0.0);
  parallel_for(options.stations, [&](int k) {
    const double s = s0 + (k + 0.5) * ds;
    std::size_t j = 0;
    while (j + 2 < samples.size() && samples[j + 1].s < s) ++j;
    const BeamSample& a = samples[j];
    const BeamSample& b = samples[j + 1];
    const double t = (s - a.s) / (b.s - a.s);
    const Vec2 xs = (1.0 - t) * a.x + t * b.x;
    const Vec2 vs = (1.0 - t) * a.xdot + t * b.xdot;
    const Vec2 normal = perp<double>(vs).normalized();
    double acc = 0.0, acc_field = 0.0;
    for (int i = 0; i < options.transverse; ++i) {
      const double eta = -half_width + (i + 0.5) * deta;
      const Vec2 x = xs + eta * normal;
      FieldSample<double> centre;
      const std::complex<double> rel = relative_residual(field, medium, x, h, centre);
      const double u2 = centre.cutoff * centre.cutoff * std::exp(2.0 * centre.log_magnitude);
      acc += std::norm(rel) * u2;
      acc_field += u2;
    }
    const double w = vs.norm() * ds * deta;
    station_sum[static_cast<std::size_t>(k)] = acc * w;
    station_field[static_cast<std::size_t>(k)] = acc_field * w;
  });

  ResidualResult out;
  out.lambda = lambda;
  double total = 0.0, total_field = 0.0;
  for (std::size_t k = 0; k < station_sum.size(); ++k) total += station_sum[k], total_field += station_field[k];
  out.residual_norm = std::sqrt(total);
  out.field_norm = std::sqrt(total_field);
  out.points = options.stations * options.transverse;
  return out;
}

} // namespace hflow
