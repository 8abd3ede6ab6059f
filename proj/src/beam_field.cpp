#include "hflow/beam_field.hpp"

#include <array>

namespace hflow {

std::vector<double> boundary_angles(int nodes) {
  std::vector<double> theta(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) theta[static_cast<std::size_t>(j)] = 2.0 * kPi * j / nodes;
  return theta;
}

double window_weight(double r, double window) {
  const double t = std::clamp(2.0 * r / window - 1.0, 0.0, 1.0);
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

std::pair<double, double> parabola_vertex(double l_minus, double l_0, double l_plus) {
  const double curv = l_minus - 2.0 * l_0 + l_plus;
  if (!(curv < 0.0)) return {0.0, l_0};
  const double offset = std::clamp(0.5 * (l_minus - l_plus) / curv, -1.0, 1.0);
  return {offset, l_0 - 0.25 * (l_minus - l_plus) * offset};
}

std::pair<double, double> quartic_peak(const std::array<double, 5>& l) {
  // l[i] = log|U| at offset i - 2; interpolating quartic in monomial form
  Eigen::Matrix<double, 5, 5> v;
  Eigen::Matrix<double, 5, 1> rhs;
  for (int i = 0; i < 5; ++i) {
    const double u = i - 2.0;
    for (int p = 0; p < 5; ++p) v(i, p) = std::pow(u, p);
    rhs(i) = l[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix<double, 5, 1> c = v.fullPivLu().solve(rhs);
  auto poly = [&](double u) { return c(0) + u * (c(1) + u * (c(2) + u * (c(3) + u * c(4)))); };
  double u = parabola_vertex(l[1], l[2], l[3]).first;
  for (int it = 0; it < 50; ++it) {
    const double d1 = c(1) + u * (2 * c(2) + u * (3 * c(3) + u * 4 * c(4)));
    const double d2 = 2 * c(2) + u * (6 * c(3) + u * 12 * c(4));
    if (!(d2 < 0.0)) break;
    const double step = d1 / d2;
    u = std::clamp(u - step, -1.0, 1.0);
    if (std::abs(step) < 1e-14) break;
  }
  return {u, poly(u)};
}

void locate_peak(BoundaryTrace& trace, double floor) {
  const int n = static_cast<int>(trace.abs_u.size());
  if (n < 5) throw ContractViolation("locate_peak: need at least five nodes");
  const auto it = std::max_element(trace.abs_u.begin(), trace.abs_u.end());
  const int k = static_cast<int>(it - trace.abs_u.begin());
  trace.peak_index = k;
  trace.peak_theta = trace.theta[static_cast<std::size_t>(k)];
  trace.peak_value = *it;
  std::array<double, 5> u{};
  for (int i = 0; i < 5; ++i) u[static_cast<std::size_t>(i)] = trace.abs_u[static_cast<std::size_t>((k + i - 2 + n) % n)];
  const double spacing = 2.0 * kPi / n;
  if (*it > 0.0 && u[0] > 0.0 && u[4] > 0.0 && u[1] > 0.0 && u[3] > 0.0) {
    std::array<double, 5> l{};
    for (std::size_t i = 0; i < 5; ++i) l[i] = std::log(u[i]);
    const auto [offset, value] = quartic_peak(l);
    trace.peak_theta += offset * spacing;
    trace.peak_value = std::exp(value);
  } else if (*it > 0.0 && u[1] > 0.0 && u[3] > 0.0) {
    const auto [offset, value] = parabola_vertex(std::log(u[1]), std::log(u[2]), std::log(u[3]));
    trace.peak_theta += offset * spacing;
    trace.peak_value = std::exp(value);
  }
  trace.degenerate = !(trace.peak_value >= floor);
}

BoundaryTrace boundary_trace(const BeamField& field, const Domain& domain, const BoundarySampling& sampling) {
  if (sampling.nodes < 3) throw ContractViolation("boundary_trace: need at least three nodes");
  const auto& samples = field.beam().samples;
  const double tau = samples.back().s;
  const double s_min = 0.5 * sampling.window * tau;

  Box box{Vec2::Constant(std::numeric_limits<double>::infinity()),
          Vec2::Constant(-std::numeric_limits<double>::infinity())};
  for (const BeamSample& b : samples) {
    if (b.s < s_min) continue;
    box.lower = box.lower.cwiseMin(b.x);
    box.upper = box.upper.cwiseMax(b.x);
  }
  const double pad = 2.0 * field.cutoff_radius();
  box.lower.array() -= pad;
  box.upper.array() += pad;

  BoundaryTrace out;
  out.theta = boundary_angles(sampling.nodes);
  out.abs_u.assign(out.theta.size(), 0.0);
  for (std::size_t j = 0; j < out.theta.size(); ++j) {
    const Vec2 xb = domain.boundary_point(out.theta[j]).point;
    if ((xb.array() < box.lower.array()).any() || (xb.array() > box.upper.array()).any()) continue;
    const FieldSample<double> f = field.evaluate<double>(xb);
    if (f.s <= s_min || f.cutoff == 0.0) continue;
    const double u = f.cutoff * window_weight(f.s / tau, sampling.window) * std::exp(f.log_magnitude);
    out.abs_u[j] = u < 1e-300 ? 0.0 : u;
  }

  locate_peak(out, sampling.floor);
  return out;
}

} // namespace hflow
