#pragma once

#include <array>

#include "hflow/types.hpp"

namespace hflow {

/// Value of a scalar function together with its partial derivatives up to
/// third order at one point. `third[i](j, k)` holds d^3 f / dx_i dx_j dx_k.
template <typename Scalar, int Dim = kDim>
struct Jet {
  using VectorT = Eigen::Matrix<Scalar, Dim, 1>;
  using MatrixT = Eigen::Matrix<Scalar, Dim, Dim>;

  Scalar value{0};
  VectorT grad = VectorT::Zero();
  MatrixT hess = MatrixT::Zero();
  std::array<MatrixT, Dim> third = zero_third();

  static std::array<MatrixT, Dim> zero_third() {
    std::array<MatrixT, Dim> t;
    for (auto& m : t) m.setZero();
    return t;
  }

  static Jet constant(Scalar c) {
    Jet j;
    j.value = c;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    value += o.value;
    grad += o.grad;
    hess += o.hess;
    for (int i = 0; i < Dim; ++i) third[i] += o.third[i];
    return *this;
  }

  Jet& operator*=(Scalar c) {
    value *= c;
    grad *= c;
    hess *= c;
    for (auto& m : third) m *= c;
    return *this;
  }
};

template <typename Scalar, int Dim>
Jet<Scalar, Dim> operator+(Jet<Scalar, Dim> a, const Jet<Scalar, Dim>& b) {
  a += b;
  return a;
}

template <typename Scalar, int Dim>
Jet<Scalar, Dim> operator*(Jet<Scalar, Dim> a, Scalar c) {
  a *= c;
  return a;
}

/// Leibniz rule through third order.
template <typename Scalar, int Dim>
Jet<Scalar, Dim> operator*(const Jet<Scalar, Dim>& f, const Jet<Scalar, Dim>& g) {
  Jet<Scalar, Dim> r;
  r.value = f.value * g.value;
  r.grad = f.grad * g.value + g.grad * f.value;
  r.hess = f.hess * g.value + f.grad * g.grad.transpose() + g.grad * f.grad.transpose() + g.hess * f.value;
  for (int i = 0; i < Dim; ++i) {
    auto& t = r.third[i];
    t = f.third[i] * g.value + g.third[i] * f.value;
    // f_ij g_k + f_ik g_j + f_jk g_i, and the same with f <-> g
    t += f.hess.col(i) * g.grad.transpose() + g.grad * f.hess.row(i);
    t += f.hess * g.grad(i);
    t += g.hess.col(i) * f.grad.transpose() + f.grad * g.hess.row(i);
    t += g.hess * f.grad(i);
  }
  return r;
}

/// Chain rule for phi(u(x)) given phi and its first three derivatives at u(x).
template <typename Scalar, int Dim>
Jet<Scalar, Dim> compose(const Jet<Scalar, Dim>& u, Scalar d0, Scalar d1, Scalar d2, Scalar d3) {
  Jet<Scalar, Dim> r;
  r.value = d0;
  r.grad = d1 * u.grad;
  r.hess = d2 * (u.grad * u.grad.transpose()) + d1 * u.hess;
  for (int i = 0; i < Dim; ++i) {
    auto& t = r.third[i];
    t = d3 * u.grad(i) * (u.grad * u.grad.transpose());
    t += d2 * (u.hess.col(i) * u.grad.transpose() + u.grad * u.hess.row(i) + u.hess * u.grad(i));
    t += d1 * u.third[i];
  }
  return r;
}

template <typename Scalar, int Dim>
Jet<Scalar, Dim> reciprocal(const Jet<Scalar, Dim>& u) {
  const Scalar v = u.value;
  return compose(u, Scalar(1) / v, Scalar(-1) / (v * v), Scalar(2) / (v * v * v), Scalar(-6) / (v * v * v * v));
}

using Jet2 = Jet<double, kDim>;

} // namespace hflow
