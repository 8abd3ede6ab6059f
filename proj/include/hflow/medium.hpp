#pragma once

#include "hflow/domain.hpp"
#include "hflow/field.hpp"

namespace hflow {

enum class MetricKind { euclidean, conformal };

/// Isotropic metric g = c(x) I. The conformal factor must be positive and
/// equal to one near the boundary so that g matches the Euclidean metric
/// outside M.
struct Metric {
  MetricKind kind = MetricKind::euclidean;
  ScalarField factor = ScalarField::constant(1.0);

  static Metric euclidean() { return {}; }
  static Metric conformal(ScalarField c) { return {MetricKind::conformal, std::move(c)}; }
};

/// Derivatives of H(x, p) = |p|_g^2 - n^2(x) at one phase-space point.
/// `xp(i, j)` is d^2 H / dx_i dp_j.
struct HamiltonianDerivatives {
  double value = 0.0;
  double n2 = 0.0;
  double inverse_metric = 1.0;  // 1 / c(x)
  Vec2 x = Vec2::Zero();
  Vec2 p = Vec2::Zero();
  Mat2 xx = Mat2::Zero();
  Mat2 xp = Mat2::Zero();
  Mat2 pp = Mat2::Zero();
};

/// Coefficients and geometry of one acoustic medium.
class Medium {
 public:
  Medium(Domain domain, ScalarField n2, Metric metric = Metric::euclidean(), double extension = 0.2);

  const Domain& domain() const { return domain_; }
  const ScalarField& n2_field() const { return n2_; }
  const Metric& metric() const { return metric_; }
  double extension() const { return extension_; }

  /// n^2 with derivatives; throws OutOfDomainError outside M'.
  Jet2 n2(const Vec2& x, int order = 3) const;
  /// 1 / c(x) with derivatives.
  Jet2 inverse_metric(const Vec2& x, int order = 3) const;

  double hamiltonian(const Vec2& x, const Vec2& p) const;
  /// order 1 fills value/x/p, order 2 also the Hessian blocks.
  HamiltonianDerivatives derivatives(const Vec2& x, const Vec2& p, int order = 2) const;

  /// Same geometry and metric with a different n^2.
  Medium with_n2(ScalarField n2) const { return Medium(domain_, std::move(n2), metric_, extension_); }

 private:
  void check(const Vec2& x) const;

  Domain domain_;
  ScalarField n2_;
  Metric metric_;
  double extension_;
};

} // namespace hflow
