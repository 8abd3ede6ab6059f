#include "hflow/medium.hpp"

#include <sstream>

#include "hflow/errors.hpp"

namespace hflow {

Medium::Medium(Domain domain, ScalarField n2, Metric metric, double extension)
    : domain_(std::move(domain)), n2_(std::move(n2)), metric_(std::move(metric)), extension_(extension) {}

void Medium::check(const Vec2& x) const {
  if (!domain_.in_extended(x, extension_)) {
    std::ostringstream os;
    os << "point (" << x(0) << ", " << x(1) << ") lies outside the extended domain";
    throw OutOfDomainError(os.str());
  }
}

Jet2 Medium::n2(const Vec2& x, int order) const {
  check(x);
  return n2_.evaluate(x, order);
}

Jet2 Medium::inverse_metric(const Vec2& x, int order) const {
  if (metric_.kind == MetricKind::euclidean) return Jet2::constant(1.0);
  const Jet2 c = metric_.factor.evaluate(x, order);
  if (!(c.value > 0.0)) throw ContractViolation("conformal factor must be positive");
  return reciprocal(c);
}

double Medium::hamiltonian(const Vec2& x, const Vec2& p) const {
  return inverse_metric(x, 0).value * p.squaredNorm() - n2(x, 0).value;
}

HamiltonianDerivatives Medium::derivatives(const Vec2& x, const Vec2& p, int order) const {
  const Jet2 n = n2(x, order);
  const Jet2 mu = inverse_metric(x, order);
  const double p2 = p.squaredNorm();
  HamiltonianDerivatives d;
  d.n2 = n.value;
  d.inverse_metric = mu.value;
  d.value = mu.value * p2 - n.value;
  d.x = mu.grad * p2 - n.grad;
  d.p = 2.0 * mu.value * p;
  if (order >= 2) {
    d.xx = mu.hess * p2 - n.hess;
    d.xp = 2.0 * mu.grad * p.transpose();
    d.pp = 2.0 * mu.value * Mat2::Identity();
  }
  return d;
}

} // namespace hflow
