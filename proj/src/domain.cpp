#include "hflow/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hflow/errors.hpp"

namespace hflow {

namespace {

double wrap_angle(double theta) {
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

// sqrt(u) through third order; callers keep u away from zero.
Jet2 sqrt_jet(const Jet2& u) {
  const double r = std::sqrt(u.value);
  return compose(u, r, 0.5 / r, -0.25 / (r * u.value), 0.375 / (r * u.value * u.value));
}

} // namespace

Domain Domain::disk(Vec2 center, double radius) {
  if (!(radius > 0.0)) throw ConfigError("domain.radius must be positive");
  Domain d;
  d.kind_ = DomainKind::disk;
  d.center_ = center;
  d.axes_ = Vec2::Constant(radius);
  return d;
}

Domain Domain::ellipse(Vec2 center, Vec2 semi_axes) {
  if (!(semi_axes.minCoeff() > 0.0)) throw ConfigError("domain.axes must be positive");
  Domain d;
  d.kind_ = DomainKind::ellipse;
  d.center_ = center;
  d.axes_ = semi_axes;
  return d;
}

Domain Domain::smoothed_polygon(Vec2 center, double apothem, int sides, double sharpness) {
  if (!(apothem > 0.0)) throw ConfigError("domain.radius must be positive");
  if (sides < 3) throw ConfigError("domain.sides must be at least 3");
  if (!(sharpness > 0.0)) throw ConfigError("domain.sharpness must be positive");
  Domain d;
  d.kind_ = DomainKind::smoothed_polygon;
  d.center_ = center;
  d.axes_ = Vec2::Constant(apothem);
  d.sides_ = sides;
  d.sharpness_ = sharpness;
  return d;
}

double Domain::radius() const { return axes_.minCoeff(); }

double Domain::diameter() const {
  if (kind_ == DomainKind::smoothed_polygon) return 2.0 * axes_(0) / std::cos(kPi / sides_);
  return 2.0 * axes_.maxCoeff();
}

// Log-sum-exp of the edge functions n_i . (x - c) - apothem, scaled by 1/k.
double Domain::polygon_level(const Vec2& x, Vec2* grad, Mat2* hess) const {
  const Vec2 d = x - center_;
  const double k = sharpness_;
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < sides_; ++i) {
    const double a = 2.0 * kPi * i / sides_;
    top = std::max(top, k * (std::cos(a) * d(0) + std::sin(a) * d(1) - axes_(0)));
  }
  double sum = 0.0;
  Vec2 first = Vec2::Zero();
  Mat2 second = Mat2::Zero();
  for (int i = 0; i < sides_; ++i) {
    const double a = 2.0 * kPi * i / sides_;
    const Vec2 n(std::cos(a), std::sin(a));
    const double w = std::exp(k * (n.dot(d) - axes_(0)) - top);
    sum += w;
    first += w * n;
    second += w * n * n.transpose();
  }
  first /= sum;
  second /= sum;
  if (grad) *grad = first;
  if (hess) *hess = k * (second - first * first.transpose());
  return (top + std::log(sum)) / k;
}

double Domain::rho(const Vec2& x) const {
  const Vec2 d = x - center_;
  switch (kind_) {
    case DomainKind::disk:
      return d.norm() - axes_(0);
    case DomainKind::ellipse: {
      const Vec2 a2 = axes_.array().square();
      const double q = (d.array().square() / a2.array()).sum();
      const double gq = (2.0 * d.array() / a2.array()).matrix().norm();
      return (q - 1.0) / std::max(gq, 1e-300);
    }
    case DomainKind::smoothed_polygon: {
      Vec2 g;
      const double f = polygon_level(x, &g, nullptr);
      return f / g.norm();
    }
  }
  return 0.0;
}

Vec2 Domain::rho_gradient(const Vec2& x) const {
  const Vec2 d = x - center_;
  switch (kind_) {
    case DomainKind::disk: {
      const double r = d.norm();
      return r > 0.0 ? Vec2(d / r) : Vec2::Zero();
    }
    case DomainKind::ellipse: {
      const Vec2 a2 = axes_.array().square();
      const double q = (d.array().square() / a2.array()).sum();
      const Vec2 gq = 2.0 * d.array() / a2.array();
      const Mat2 hq = (2.0 / a2.array()).matrix().asDiagonal();
      const double ng = gq.norm();
      if (ng == 0.0) return Vec2::Zero();
      const Vec2 gn = hq * gq / ng;
      return gq / ng - (q - 1.0) * gn / (ng * ng);
    }
    case DomainKind::smoothed_polygon: {
      Vec2 g;
      Mat2 h;
      const double f = polygon_level(x, &g, &h);
      const double ng = g.norm();
      return g / ng - f * (h * g) / (ng * ng * ng);
    }
  }
  return Vec2::Zero();
}

Jet2 Domain::depth(const Vec2& x) const {
  const Vec2 d = x - center_;
  switch (kind_) {
    case DomainKind::disk: {
      const double r2 = d.squaredNorm();
      if (r2 < 1e-24) return Jet2::constant(axes_(0));
      Jet2 u;
      u.value = r2;
      u.grad = 2.0 * d;
      u.hess = 2.0 * Mat2::Identity();
      Jet2 out = sqrt_jet(u) * -1.0;
      out.value += axes_(0);
      return out;
    }
    case DomainKind::ellipse: {
      const Vec2 a2 = axes_.array().square();
      Jet2 q;
      q.value = (d.array().square() / a2.array()).sum();
      if (q.value < 1e-24) return Jet2::constant(radius());
      q.grad = 2.0 * d.array() / a2.array();
      q.hess = (2.0 / a2.array()).matrix().asDiagonal();
      // Points on the level set sqrt(q) = e lie at least (1 - e) * min axis
      // from the boundary.
      Jet2 out = sqrt_jet(q) * -radius();
      out.value += radius();
      return out;
    }
    case DomainKind::smoothed_polygon: {
      // -F is 1-Lipschitz below the distance because |grad F| <= 1.
      const double k = sharpness_;
      Vec2 g;
      Mat2 h;
      const double f = polygon_level(x, &g, &h);
      double top = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < sides_; ++i) {
        const double a = 2.0 * kPi * i / sides_;
        top = std::max(top, k * (std::cos(a) * d(0) + std::sin(a) * d(1) - axes_(0)));
      }
      double sum = 0.0;
      Mat2 m2 = Mat2::Zero();
      std::array<Mat2, kDim> m3{Mat2::Zero(), Mat2::Zero()};
      for (int i = 0; i < sides_; ++i) {
        const double a = 2.0 * kPi * i / sides_;
        const Vec2 n(std::cos(a), std::sin(a));
        const double w = std::exp(k * (n.dot(d) - axes_(0)) - top);
        sum += w;
        m2 += w * n * n.transpose();
        for (int j = 0; j < kDim; ++j) m3[j] += w * n(j) * n * n.transpose();
      }
      m2 /= sum;
      Jet2 out;
      out.value = -f;
      out.grad = -g;
      out.hess = -h;
      for (int i = 0; i < kDim; ++i) {
        m3[i] /= sum;
        const Mat2 kappa = m3[i] - m2.col(i) * g.transpose() - g * m2.row(i) - m2 * g(i) +
                           2.0 * g(i) * g * g.transpose();
        out.third[i] = -k * k * kappa;
      }
      return out;
    }
  }
  return Jet2::constant(0.0);
}

BoundaryPoint Domain::boundary_point(double theta) const {
  const Vec2 u(std::cos(theta), std::sin(theta));
  switch (kind_) {
    case DomainKind::disk:
      return {center_ + axes_(0) * u, -u};
    case DomainKind::ellipse: {
      const Vec2 d(axes_(0) * u(0), axes_(1) * u(1));
      const Vec2 g = (d.array() / axes_.array().square()).matrix();
      return {center_ + d, -g.normalized()};
    }
    case DomainKind::smoothed_polygon: {
      double lo = 0.0;
      double hi = diameter();
      double t = axes_(0);
      for (int it = 0; it < 200; ++it) {
        Vec2 g;
        const double f = polygon_level(center_ + t * u, &g, nullptr);
        if (std::abs(f) < 1e-15) break;
        (f < 0.0 ? lo : hi) = t;
        const double slope = g.dot(u);
        double next = slope > 0.0 ? t - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
      }
      const Vec2 p = center_ + t * u;
      Vec2 g;
      polygon_level(p, &g, nullptr);
      return {p, -g.normalized()};
    }
  }
  return {center_, Vec2::Zero()};
}

bool Domain::in_extended(const Vec2& x, double margin_fraction) const {
  return rho(x) <= margin_fraction * radius();
}

Box Domain::bounding_box() const {
  Vec2 half = axes_;
  if (kind_ == DomainKind::smoothed_polygon) half.setConstant(axes_(0) / std::cos(kPi / sides_));
  return {center_ - half, center_ + half};
}

double Domain::parameter_of(const Vec2& boundary_x) const {
  const Vec2 d = boundary_x - center_;
  if (kind_ == DomainKind::ellipse) return wrap_angle(std::atan2(d(1) / axes_(1), d(0) / axes_(0)));
  return wrap_angle(std::atan2(d(1), d(0)));
}

} // namespace hflow
