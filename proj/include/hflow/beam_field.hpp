#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>
#include <vector>

#include "hflow/beam.hpp"
#include "hflow/domain.hpp"
#include "hflow/errors.hpp"

namespace hflow {

/// One evaluation of the beam field U = cutoff * exp(log_magnitude + i phase).
template <typename Scalar>
struct FieldSample {
  Scalar log_magnitude = Scalar(0);
  Scalar phase = Scalar(0);
  Scalar cutoff = Scalar(0);
  double s = 0.0;         // closest-point parameter
  double distance = 0.0;  // |x - x(s)|
};

/// Gaussian beam field around one ray. The stored samples are interpolated
/// with cubic Hermite polynomials in s; outside [0, tau] the data is
/// extended linearly. Evaluation is reentrant and can run in any scalar type
/// that supports the usual math functions (double, quad precision).
class BeamField {
 public:
  explicit BeamField(BeamState beam) : beam_(std::move(beam)) {
    auto& smp = beam_.samples;
    if (smp.size() < 2) throw ContractViolation("BeamField: beam has fewer than two samples");
    // A sliver final step (exit refinement) spoils the Hermite second derivative.
    if (const std::size_t n = smp.size(); n >= 3) {
      const double last = smp[n - 1].s - smp[n - 2].s, prev = smp[n - 2].s - smp[n - 3].s;
      if (last < 1e-2 * prev) smp.erase(smp.end() - 2);
    }
    radius_ = beam_.config.cutoff_radius();
    lambda_ = beam_.config.lambda;
    stride_ = std::max<std::size_t>(1, smp.size() / 256);
  }

  const BeamState& beam() const { return beam_; }
  double lambda() const { return lambda_; }
  double cutoff_radius() const { return radius_; }

  /// Closest-point parameter: polyline projection, then Newton on
  /// (x(s) - x) . x'(s) = 0 iterated to convergence.
  double closest_parameter(const Vec2& x) const {
    double s = polyline_projection(x);
    for (int it = 0; it < 30; ++it) {
      const double step = newton_step<double>(x, s);
      s -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(s))) break;
    }
    return s;
  }

  template <typename Scalar>
  FieldSample<Scalar> evaluate(const Vector<Scalar>& x) const {
    using std::abs;
    const Vec2 xd(static_cast<double>(x(0)), static_cast<double>(x(1)));
    Scalar s = Scalar(closest_parameter(xd));
    if constexpr (!std::is_same_v<Scalar, double>) {
      const Scalar eps = std::numeric_limits<Scalar>::epsilon();
      for (int it = 0; it < 8; ++it) {
        const Scalar step = newton_step<Scalar>(x, s);
        s -= step;
        if (abs(step) < 4 * eps * (1 + abs(s))) break;
      }
    }
    return evaluate_at(x, s);
  }

  std::complex<double> value(const Vec2& x) const {
    const FieldSample<double> f = evaluate<double>(x);
    if (f.cutoff == 0.0) return 0.0;
    return f.cutoff * std::exp(std::complex<double>(f.log_magnitude, f.phase));
  }

  double magnitude(const Vec2& x) const {
    const FieldSample<double> f = evaluate<double>(x);
    if (f.cutoff == 0.0) return 0.0;
    return f.cutoff * std::exp(f.log_magnitude);
  }

  /// C^2 quintic step: 1 for r <= radius, 0 for r >= 2 radius.
  template <typename Scalar>
  Scalar cutoff(const Scalar& r) const {
    const Scalar t = r / Scalar(radius_) - 1;
    if (t <= 0) return Scalar(1);
    if (t >= 1) return Scalar(0);
    const Scalar u = 1 - t;
    return u * u * u * (10 - 15 * u + 6 * u * u);
  }

 private:
  template <typename Scalar>
  struct Interp {
    Vector<Scalar> x, xd, xdd, p;
    Matrix<Scalar> m_re, m_im;
    Scalar phase, la_re, la_im;
  };

  std::size_t nearest_sample(const Vec2& x) const {
    const auto& smp = beam_.samples;
    const std::size_t n = smp.size();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; k += stride_) {
      const double d = (smp[k].x - x).squaredNorm();
      if (d < best_d) best_d = d, best = k;
    }
    const std::size_t lo = best > stride_ ? best - stride_ : 0;
    const std::size_t hi = std::min(n - 1, best + stride_);
    for (std::size_t k = lo; k <= hi; ++k) {
      const double d = (smp[k].x - x).squaredNorm();
      if (d < best_d) best_d = d, best = k;
    }
    return best;
  }

  double polyline_projection(const Vec2& x) const {
    const auto& smp = beam_.samples;
    const std::size_t k = nearest_sample(x);
    double best_s = smp[k].s;
    double best_d = (smp[k].x - x).squaredNorm();
    for (std::size_t j : {k > 0 ? k - 1 : k, k}) {
      if (j + 1 >= smp.size()) continue;
      const Vec2 seg = smp[j + 1].x - smp[j].x;
      const double len2 = seg.squaredNorm();
      if (len2 == 0.0) continue;
      const double t = std::clamp((x - smp[j].x).dot(seg) / len2, 0.0, 1.0);
      const double d = (smp[j].x + t * seg - x).squaredNorm();
      if (d < best_d) best_d = d, best_s = smp[j].s + t * (smp[j + 1].s - smp[j].s);
    }
    return best_s;
  }

  std::size_t interval_of(double s) const {
    const auto& smp = beam_.samples;
    auto it = std::upper_bound(smp.begin(), smp.end(), s, [](double v, const BeamSample& b) { return v < b.s; });
    std::size_t k = static_cast<std::size_t>(it - smp.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, smp.size() - 2);
  }

  template <typename Scalar>
  Interp<Scalar> interpolate(const Scalar& s) const {
    const auto& smp = beam_.samples;
    const double sd = static_cast<double>(s);
    Interp<Scalar> r;
    auto cast_v = [](const Vec2& v) { return v.template cast<Scalar>().eval(); };
    auto cast_m = [](const Mat2& m) { return m.template cast<Scalar>().eval(); };

    if (sd < smp.front().s || sd > smp.back().s) {
      const BeamSample& e = sd < smp.front().s ? smp.front() : smp.back();
      const Scalar ds = s - Scalar(e.s);
      r.x = cast_v(e.x) + ds * cast_v(e.xdot);
      r.xd = cast_v(e.xdot);
      r.xdd = Vector<Scalar>::Zero();
      r.p = cast_v(e.p) + ds * cast_v(e.pdot);
      r.m_re = cast_m(e.m.real()) + ds * cast_m(e.mdot.real());
      r.m_im = cast_m(e.m.imag()) + ds * cast_m(e.mdot.imag());
      r.phase = Scalar(e.phase) + ds * Scalar(e.phase_dot);
      r.la_re = Scalar(e.log_amplitude.real()) + ds * Scalar(e.log_amplitude_dot.real());
      r.la_im = Scalar(e.log_amplitude.imag()) + ds * Scalar(e.log_amplitude_dot.imag());
      return r;
    }

    const std::size_t k = interval_of(sd);
    const BeamSample& a = smp[k];
    const BeamSample& b = smp[k + 1];
    const Scalar h = Scalar(b.s - a.s);
    const Scalar t = (s - Scalar(a.s)) / h;
    const Scalar t2 = t * t, t3 = t2 * t;
    const Scalar h00 = 2 * t3 - 3 * t2 + 1, h10 = (t3 - 2 * t2 + t) * h;
    const Scalar h01 = -2 * t3 + 3 * t2, h11 = (t3 - t2) * h;
    const Scalar d00 = (6 * t2 - 6 * t) / h, d10 = 3 * t2 - 4 * t + 1;
    const Scalar d01 = (-6 * t2 + 6 * t) / h, d11 = 3 * t2 - 2 * t;
    const Scalar e00 = (12 * t - 6) / (h * h), e10 = (6 * t - 4) / h;
    const Scalar e01 = (-12 * t + 6) / (h * h), e11 = (6 * t - 2) / h;

    r.x = h00 * cast_v(a.x) + h10 * cast_v(a.xdot) + h01 * cast_v(b.x) + h11 * cast_v(b.xdot);
    r.xd = d00 * cast_v(a.x) + d10 * cast_v(a.xdot) + d01 * cast_v(b.x) + d11 * cast_v(b.xdot);
    r.xdd = e00 * cast_v(a.x) + e10 * cast_v(a.xdot) + e01 * cast_v(b.x) + e11 * cast_v(b.xdot);
    r.p = h00 * cast_v(a.p) + h10 * cast_v(a.pdot) + h01 * cast_v(b.p) + h11 * cast_v(b.pdot);
    r.m_re = h00 * cast_m(a.m.real()) + h10 * cast_m(a.mdot.real()) + h01 * cast_m(b.m.real()) +
             h11 * cast_m(b.mdot.real());
    r.m_im = h00 * cast_m(a.m.imag()) + h10 * cast_m(a.mdot.imag()) + h01 * cast_m(b.m.imag()) +
             h11 * cast_m(b.mdot.imag());
    r.phase = h00 * Scalar(a.phase) + h10 * Scalar(a.phase_dot) + h01 * Scalar(b.phase) + h11 * Scalar(b.phase_dot);
    r.la_re = h00 * Scalar(a.log_amplitude.real()) + h10 * Scalar(a.log_amplitude_dot.real()) +
              h01 * Scalar(b.log_amplitude.real()) + h11 * Scalar(b.log_amplitude_dot.real());
    r.la_im = h00 * Scalar(a.log_amplitude.imag()) + h10 * Scalar(a.log_amplitude_dot.imag()) +
              h01 * Scalar(b.log_amplitude.imag()) + h11 * Scalar(b.log_amplitude_dot.imag());
    return r;
  }

  /// Newton increment for g(s) = (x(s) - x) . x'(s); zero when g' <= 0.
  template <typename Scalar>
  Scalar newton_step(const Vector<Scalar>& x, const Scalar& s) const {
    const Interp<Scalar> c = interpolate(s);
    const Vector<Scalar> y = c.x - x;
    const Scalar g = y.dot(c.xd);
    const Scalar dg = c.xd.squaredNorm() + y.dot(c.xdd);
    if (!(dg > 0)) return Scalar(0);
    return g / dg;
  }

  template <typename Scalar>
  FieldSample<Scalar> evaluate_at(const Vector<Scalar>& x, const Scalar& s) const {
    using std::sqrt;
    const Interp<Scalar> c = interpolate(s);
    const Vector<Scalar> y = x - c.x;
    const Scalar psi_re = c.phase + y.dot(c.p) + y.dot(c.m_re * y) / 2;
    const Scalar psi_im = y.dot(c.m_im * y) / 2;
    FieldSample<Scalar> f;
    f.log_magnitude = c.la_re - Scalar(lambda_) * psi_im;
    f.phase = c.la_im + Scalar(lambda_) * psi_re;
    const Scalar dist = sqrt(y.squaredNorm());
    f.cutoff = cutoff(dist);
    f.s = static_cast<double>(s);
    f.distance = static_cast<double>(dist);
    return f;
  }

  BeamState beam_;
  double radius_ = 0.0;
  double lambda_ = 0.0;
  std::size_t stride_ = 1;
};

struct BoundarySampling {
  int nodes = 720;
  double floor = 1e-12;
  /// Exit-side window in the closest-point parameter: |U| is multiplied by
  /// window_weight(s / tau, window), which vanishes below window / 2 and is
  /// one above `window`, so the source neighbourhood does not enter the record.
  double window = 0.5;
};

struct BoundaryTrace {
  std::vector<double> theta;
  std::vector<double> abs_u;
  int peak_index = -1;
  double peak_theta = 0.0;
  double peak_value = 0.0;  // from a quartic fit of log|U| through the five nodes around the maximum
  bool degenerate = false;  // peak below the floor
};

/// Boundary node angles theta_j = 2 pi j / nodes.
std::vector<double> boundary_angles(int nodes);

/// Samples |U| at the boundary nodes of `domain` and locates the peak.
BoundaryTrace boundary_trace(const BeamField& field, const Domain& domain, const BoundarySampling& sampling = {});

/// C^2 step in r: 0 for r <= window / 2, 1 for r >= window.
double window_weight(double r, double window);

/// Recomputes peak_index, peak_theta, peak_value and degenerate from
/// theta/abs_u: the quartic through log|U| at the maximal node and two
/// neighbours on each side is maximized within one node spacing (three
/// nodes and a parabola when the outer neighbours are zero).
void locate_peak(BoundaryTrace& trace, double floor = 1e-12);

/// Vertex of the parabola through (-1, l_minus), (0, l_0), (1, l_plus):
/// returns {offset, value}. Falls back to {0, l_0} for a non-concave triple.
std::pair<double, double> parabola_vertex(double l_minus, double l_0, double l_plus);
/// Maximum of the quartic through l[i] at offsets i - 2: {offset, value}.
std::pair<double, double> quartic_peak(const std::array<double, 5>& l);

} // namespace hflow
