#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "hflow/medium.hpp"
#include "hflow/ray.hpp"

namespace hflow {

/// Which Hamiltonian drives the Hessian (Riccati) equation.
///
/// `hamiltonian` differentiates H = |p|_g^2 - n^2 itself. This is the form
/// that keeps M(s) x'(s) = p'(s) along the rays traced with dx/ds = dH/dp and
/// makes the quadratic phase solve the eikonal equation to third order.
///
/// `homogenized` differentiates H~ = p . dH/dp = 2 |p|_g^2 instead. H~
/// generates the same curves at twice the speed, so along our rays it gives
/// dM/ds = -4 M^2 in a constant medium and ignores the curvature of n^2.
enum class RiccatiForm { hamiltonian, homogenized };

struct BeamConfig {
  double lambda = 1e4;
  double alpha = 0.5;
  std::optional<CMat2> initial_hessian;  // default_initial_hessian() when empty
  double tube_exponent = 1.0 / (2.0 * kDim);
  RiccatiForm riccati = RiccatiForm::hamiltonian;
  std::complex<double> initial_amplitude = 1.0;

  void validate() const;
  double cutoff_radius() const;
};

/// dM/ds = -(M Hpp M + Hxp M + M Hxp^T + Hxx), symmetrized.
CMat2 riccati_rhs(const Medium& medium, const Vec2& x, const Vec2& p, const CMat2& m,
                  RiccatiForm form = RiccatiForm::hamiltonian);

/// i P_perp + (p' x'^T + x' p'^T) / |x'|^2 - (x' . p') x' x'^T / |x'|^4.
CMat2 default_initial_hessian(const Vec2& xdot, const Vec2& pdot);

/// Throws ContractViolation unless M0 is symmetric, M0 x' = p' and Im M0 is
/// positive definite on x'^perp.
void check_initial_hessian(const CMat2& m0, const Vec2& xdot, const Vec2& pdot, double tol = 1e-10);

struct BeamSample {
  double s = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 xdot = Vec2::Zero();
  Vec2 p = Vec2::Zero();
  Vec2 pdot = Vec2::Zero();
  CMat2 m = CMat2::Zero();
  CMat2 mdot = CMat2::Zero();
  double phase = 0.0;  // S(s)
  double phase_dot = 0.0;
  std::complex<double> log_amplitude = 0.0;  // log a0(s)
  std::complex<double> log_amplitude_dot = 0.0;
};

struct BeamState {
  RayPath ray;
  std::vector<BeamSample> samples;
  BeamConfig config;
  double max_asymmetry = 0.0;
  double max_constraint_error = 0.0;   // max |M x' - p'| / (1 + |p'|)
  double min_transverse_imag = 0.0;    // min over samples of t^T Im M t, t unit normal to x'
};

/// Co-integrates (x, p, M, S, log a0) with RK4 over the ray's own step
/// sequence. S' = p . x' (= 2 n^2 on the energy shell), (log a0)' = -tr_g M - alpha n^2.
/// Throws BeamBreakdownError when Im M stops being positive on x'^perp.
BeamState propagate_beam(const RayPath& ray, const BeamConfig& config, const Medium& medium);

} // namespace hflow
