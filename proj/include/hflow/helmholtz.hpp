#pragma once

#include "hflow/beam_field.hpp"
#include "hflow/medium.hpp"

namespace hflow {

/// Sampling of the tube |x - x(s)| <= tube_factor * lambda^{-1/2} around a
/// beam, on which the discrete Helmholtz residual is measured.
struct ResidualOptions {
  int stations = 64;        // midpoints along s
  int transverse = 32;      // midpoints across the tube
  double tube_factor = 1.0;
  double end_margin = 0.1;  // fraction of [0, tau] skipped at each end
  double step_factor = 1e-5;  // finite-difference step = step_factor / lambda
};

struct ResidualResult {
  double lambda = 0.0;
  double residual_norm = 0.0;  // L^2 norm of L_h U over the tube
  double field_norm = 0.0;     // L^2 norm of U over the tube
  int points = 0;
};

/// Applies L_h = (1/c) Delta_h + (lambda^2 + i alpha lambda) n^2 with the
/// five-point Laplacian in quad precision to the beam field and integrates
/// |L_h U|^2 over the tube by the midpoint rule.
ResidualResult helmholtz_residual(const BeamField& field, const Medium& medium, const ResidualOptions& options = {});

} // namespace hflow
