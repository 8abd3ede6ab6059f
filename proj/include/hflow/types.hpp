#pragma once

#include <complex>

#include <Eigen/Dense>

namespace hflow {

/// Spatial dimension of the reference build. Types are written against
/// `kDim` so that a 3D build only has to change this constant and the
/// domain/boundary parametrizations.
inline constexpr int kDim = 2;

using Vec2 = Eigen::Matrix<double, kDim, 1>;
using Mat2 = Eigen::Matrix<double, kDim, kDim>;
using CVec2 = Eigen::Matrix<std::complex<double>, kDim, 1>;
using CMat2 = Eigen::Matrix<std::complex<double>, kDim, kDim>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, kDim, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, kDim, kDim>;

inline constexpr double kPi = 3.14159265358979323846;

/// Unit vector rotated by +90 degrees.
template <typename Scalar>
Vector<Scalar> perp(const Vector<Scalar>& v) {
  return Vector<Scalar>(-v(1), v(0));
}

} // namespace hflow
