#include "hflow/field.hpp"

#include <cmath>

#include "hflow/errors.hpp"

namespace hflow {

Jet2 smooth_step(const Jet2& t) {
  const double s = t.value;
  if (s <= 0.0) return Jet2::constant(0.0);
  if (s >= 1.0) return Jet2::constant(1.0);
  const double r = 1.0 - s;
  const double d0 = s * s * s * s * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
  const double d1 = 140.0 * s * s * s * r * r * r;
  const double d2 = 420.0 * s * s * r * r * (1.0 - 2.0 * s);
  const double d3 = 840.0 * s * r * (1.0 - 5.0 * s + 5.0 * s * s);
  return compose(t, d0, d1, d2, d3);
}

// ---------------------------------------------------------------------------
// GridSpline

namespace {

// Second derivatives of the not-a-knot interpolating spline along the rows of
// `f` (one spline per column).
Eigen::MatrixXd spline_second_derivatives(const Eigen::MatrixXd& f, double h) {
  const Eigen::Index n = f.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, f.cols());
  a(0, 0) = 1.0;
  a(0, 1) = -2.0;
  a(0, 2) = 1.0;
  a(n - 1, n - 3) = 1.0;
  a(n - 1, n - 2) = -2.0;
  a(n - 1, n - 1) = 1.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    a(i, i - 1) = 1.0;
    a(i, i) = 4.0;
    a(i, i + 1) = 1.0;
    rhs.row(i) = 6.0 * (f.row(i - 1) - 2.0 * f.row(i) + f.row(i + 1)) / (h * h);
  }
  return a.partialPivLu().solve(rhs);
}

// Cubic-spline cardinal pieces on one cell: A, B multiply node values and
// C, D multiply node second derivatives. w[k][m] is the m-th derivative.
struct CellBasis {
  double w[4][4];
};

CellBasis cell_basis(double t, double h) {
  const double a = 1.0 - t;
  const double b = t;
  CellBasis c{};
  c.w[0][0] = a;
  c.w[0][1] = -1.0 / h;
  c.w[1][0] = b;
  c.w[1][1] = 1.0 / h;
  c.w[2][0] = (a * a * a - a) * h * h / 6.0;
  c.w[2][1] = -(3.0 * a * a - 1.0) * h / 6.0;
  c.w[2][2] = a;
  c.w[2][3] = -1.0 / h;
  c.w[3][0] = (b * b * b - b) * h * h / 6.0;
  c.w[3][1] = (3.0 * b * b - 1.0) * h / 6.0;
  c.w[3][2] = b;
  c.w[3][3] = 1.0 / h;
  return c;
}

} // namespace

GridSpline::GridSpline(Vec2 origin, double spacing, int nx, int ny, std::vector<double> values)
    : origin_(origin), h_(spacing), nx_(nx), ny_(ny), f_(std::move(values)) {
  if (nx < 4 || ny < 4) throw ConfigError("gridded field needs at least 4x4 nodes");
  if (!(spacing > 0.0)) throw ConfigError("gridded field spacing must be positive");
  if (static_cast<int>(f_.size()) != nx * ny) throw ConfigError("gridded field values size mismatch");
  // rows <-> x index, columns <-> y index
  const Eigen::MatrixXd f = Eigen::Map<const Eigen::MatrixXd>(f_.data(), nx, ny);
  const Eigen::MatrixXd fxx = spline_second_derivatives(f, h_);
  const Eigen::MatrixXd fyy = spline_second_derivatives(f.transpose(), h_).transpose();
  const Eigen::MatrixXd fxxyy = spline_second_derivatives(fxx.transpose(), h_).transpose();
  fxx_.assign(fxx.data(), fxx.data() + fxx.size());
  fyy_.assign(fyy.data(), fyy.data() + fyy.size());
  fxxyy_.assign(fxxyy.data(), fxxyy.data() + fxxyy.size());
}

Jet2 GridSpline::evaluate(const Vec2& x, int order) const {
  const Vec2 u = (x - origin_) / h_;
  const int i = static_cast<int>(std::floor(u(0)));
  const int j = static_cast<int>(std::floor(u(1)));
  if (i < 1 || j < 1 || i > nx_ - 3 || j > ny_ - 3) {
    throw ExtrapolationError("gridded field evaluated within one cell of the grid edge");
  }
  const CellBasis bx = cell_basis(u(0) - i, h_);
  const CellBasis by = cell_basis(u(1) - j, h_);
  const std::vector<double>* table[2][2] = {{&f_, &fyy_}, {&fxx_, &fxxyy_}};

  auto mixed = [&](int dx, int dy) {
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double wa = bx.w[a][dx];
      if (wa == 0.0) continue;
      for (int b = 0; b < 4; ++b) {
        const double wb = by.w[b][dy];
        if (wb == 0.0) continue;
        const auto& t = *table[a / 2][b / 2];
        acc += wa * wb * t[(j + b % 2) * nx_ + (i + a % 2)];
      }
    }
    return acc;
  };

  Jet2 r;
  r.value = mixed(0, 0);
  if (order >= 1) r.grad = Vec2(mixed(1, 0), mixed(0, 1));
  if (order >= 2) {
    const double xy = mixed(1, 1);
    r.hess << mixed(2, 0), xy, xy, mixed(0, 2);
  }
  if (order >= 3) {
    const double xxy = mixed(2, 1);
    const double xyy = mixed(1, 2);
    r.third[0] << mixed(3, 0), xxy, xxy, xyy;
    r.third[1] << xxy, xyy, xyy, mixed(0, 3);
  }
  return r;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  f.kind_ = FieldKind::constant;
  f.base_ = c;
  return f;
}

ScalarField ScalarField::bumps(double base, std::vector<GaussianBump> bumps,
                               std::optional<BoundaryBlend> blend) {
  for (const auto& b : bumps) {
    if (!(b.width > 0.0)) throw ConfigError("bump width must be positive");
  }
  if (blend && !(blend->margin > 0.0)) throw ConfigError("blend margin must be positive");
  ScalarField f;
  f.kind_ = FieldKind::gaussian_bump_sum;
  f.base_ = base;
  f.bumps_ = std::move(bumps);
  f.blend_ = std::move(blend);
  return f;
}

ScalarField ScalarField::gridded(GridSpline spline) {
  ScalarField f;
  f.kind_ = FieldKind::gridded;
  f.spline_ = std::move(spline);
  return f;
}

ScalarField ScalarField::sampled(const ScalarField& f, const Box& box, double h, int margin_cells) {
  const Vec2 origin = box.lower - Vec2::Constant(margin_cells * h);
  const Vec2 extent = box.upper - box.lower;
  const int nx = static_cast<int>(std::ceil(extent(0) / h)) + 2 * margin_cells + 1;
  const int ny = static_cast<int>(std::ceil(extent(1) / h)) + 2 * margin_cells + 1;
  std::vector<double> values(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      values[static_cast<std::size_t>(j) * nx + i] = f.value(origin + h * Vec2(i, j));
    }
  }
  return gridded(GridSpline(origin, h, nx, ny, std::move(values)));
}

Jet2 ScalarField::evaluate(const Vec2& x, int order) const {
  switch (kind_) {
    case FieldKind::constant:
      return Jet2::constant(base_);
    case FieldKind::gridded:
      return spline_.evaluate(x, order);
    case FieldKind::gaussian_bump_sum:
      break;
  }
  Jet2 sum;
  for (const auto& b : bumps_) {
    const Vec2 d = x - b.center;
    const double w2 = b.width * b.width;
    const double e = b.amplitude * std::exp(-0.5 * d.squaredNorm() / w2);
    if (order == 0) {
      sum.value += e;
      continue;
    }
    Jet2 u;
    u.value = -0.5 * d.squaredNorm() / w2;
    u.grad = -d / w2;
    u.hess = -Mat2::Identity() / w2;
    sum += compose(u, e, e, e, e);
  }
  if (blend_) {
    Jet2 t = blend_->domain.depth(x);
    t.value -= blend_->margin;
    t *= 1.0 / blend_->margin;
    const Jet2 w = smooth_step(t);
    sum = order == 0 ? Jet2::constant(sum.value * w.value) : sum * w;
  }
  sum.value += base_;
  return sum;
}

ScalarField ScalarField::shifted(double c) const {
  ScalarField f = *this;
  if (kind_ == FieldKind::gridded) {
    std::vector<double> v = spline_.values();
    for (auto& e : v) e += c;
    f.spline_ = GridSpline(spline_.origin(), spline_.spacing(), spline_.nx(), spline_.ny(), std::move(v));
  } else {
    f.base_ += c;
  }
  return f;
}

ScalarField ScalarField::scaled(double c) const {
  ScalarField f = *this;
  if (kind_ == FieldKind::gridded) {
    std::vector<double> v = spline_.values();
    for (auto& e : v) e *= c;
    f.spline_ = GridSpline(spline_.origin(), spline_.spacing(), spline_.nx(), spline_.ny(), std::move(v));
    return f;
  }
  f.base_ *= c;
  for (auto& b : f.bumps_) b.amplitude *= c;
  return f;
}

ScalarField ScalarField::sum(const ScalarField& a, const ScalarField& b) {
  if (a.kind_ == FieldKind::gridded || b.kind_ == FieldKind::gridded) {
    throw ConfigError("field sums are only defined for analytic fields");
  }
  std::vector<GaussianBump> all = a.bumps_;
  all.insert(all.end(), b.bumps_.begin(), b.bumps_.end());
  auto blend = a.blend_ ? a.blend_ : b.blend_;
  return bumps(a.base_ + b.base_, std::move(all), blend);
}

} // namespace hflow
