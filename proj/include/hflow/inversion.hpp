#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hflow/measurement.hpp"
#include "hflow/transform.hpp"

namespace hflow {

struct RayDiagnostic {
  double peak_ref = 0.0;
  double peak_meas = 0.0;
  double ratio = 0.0;  // peak_meas / peak_ref
  bool valid = false;
  std::string reason;
};

/// values[r] = -(1 / alpha) log(peak_meas / peak_ref), the flow transform of
/// n_meas^2 - n_ref^2 along ray r of the reference medium.
struct ExtractionResult {
  std::vector<double> values;
  std::vector<RayDiagnostic> diagnostics;
  int flagged = 0;
};

/// Throws ContractViolation for incompatible datasets and Error when more
/// than half of the rays are flagged.
ExtractionResult extract_ray_integrals(const Dataset& ref, const Dataset& meas, double alpha);

struct SolverOptions {
  double reg = 1e-6;  // relative to the estimated ||A^T A||
  int max_iter = 2000;
  double tol = 1e-8;  // on the relative normal-equations residual
};

struct Reconstruction {
  Eigen::VectorXd image;                // masked pixels
  std::vector<double> residual_history; // relative normal-equations residual per iteration
  double reg_parameter = 0.0;           // absolute lambda_r
  int iterations = 0;
  bool converged = false;
  int rows_used = 0;
};

/// Largest eigenvalue of A^T A by power iteration.
double normal_operator_norm(const RayMatrix& a, int iterations = 50);

/// Forward differences over neighbouring masked pixels.
Eigen::SparseMatrix<double> gradient_operator(const PixelGrid& grid);

/// Conjugate residuals on (A^T A + lambda_r D^T D) x = A^T b, restricted to
/// rows with valid[r] != 0 (all rows when `valid` is empty). The residual is
/// non-increasing; ten consecutive increases raise SolverError.
Reconstruction solve_linear(const RayMatrix& a, const Eigen::VectorXd& b, const PixelGrid& grid,
                            const SolverOptions& options = {}, const std::vector<char>& valid = {});

} // namespace hflow
