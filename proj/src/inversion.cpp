#include "hflow/inversion.hpp"

#include <cmath>
#include <sstream>

#include "hflow/errors.hpp"

namespace hflow {

ExtractionResult extract_ray_integrals(const Dataset& ref, const Dataset& meas, double alpha) {
  if (!(alpha > 0.0)) throw ContractViolation("extract_ray_integrals: alpha must be positive");
  if (ref.records.size() != meas.records.size()) throw ContractViolation("extract_ray_integrals: fans differ in size");
  if (ref.config.beam.lambda != meas.config.beam.lambda || ref.config.beam.alpha != meas.config.beam.alpha) {
    throw ContractViolation("extract_ray_integrals: datasets were synthesized with different beam settings");
  }
  ExtractionResult out;
  out.values.assign(ref.records.size(), 0.0);
  out.diagnostics.resize(ref.records.size());
  for (std::size_t k = 0; k < ref.records.size(); ++k) {
    const PhaselessRecord& a = ref.records[k];
    const PhaselessRecord& b = meas.records[k];
    if (a.source.theta_index != b.source.theta_index || a.source.dir_index != b.source.dir_index) {
      throw ContractViolation("extract_ray_integrals: record " + std::to_string(k) + " has a different source");
    }
    RayDiagnostic& dg = out.diagnostics[k];
    dg.peak_ref = a.peak_value;
    dg.peak_meas = b.peak_value;
    dg.ratio = b.peak_value / a.peak_value;
    if (a.degenerate || b.degenerate) {
      dg.reason = "degenerate peak";
    } else if (!(dg.ratio > 0.0) || !std::isfinite(dg.ratio)) {
      dg.reason = "peak ratio not positive and finite";
    } else {
      const double v = -std::log(dg.ratio) / alpha;
      if (std::isfinite(v)) {
        dg.valid = true;
        out.values[k] = v;
      } else {
        dg.reason = "non-finite value";
      }
    }
    if (!dg.valid) ++out.flagged;
  }
  if (2 * out.flagged > static_cast<int>(ref.records.size())) {
    std::ostringstream os;
    os << "extraction failed: " << out.flagged << " of " << ref.records.size() << " rays flagged";
    throw Error(os.str());
  }
  return out;
}

double normal_operator_norm(const RayMatrix& a, int iterations) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols());
  if (v.size() == 0) return 0.0;
  v.normalize();
  double est = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    est = w.norm();
    if (est == 0.0) return 0.0;
    v = w / est;
  }
  return est;
}

Eigen::SparseMatrix<double> gradient_operator(const PixelGrid& grid) {
  const auto pairs = grid.neighbour_pairs();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * pairs.size());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    t.emplace_back(static_cast<int>(r), pairs[r].first, -1.0);
    t.emplace_back(static_cast<int>(r), pairs[r].second, 1.0);
  }
  Eigen::SparseMatrix<double> d(static_cast<Eigen::Index>(pairs.size()), grid.unknowns());
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

Reconstruction solve_linear(const RayMatrix& a_all, const Eigen::VectorXd& b_all, const PixelGrid& grid,
                            const SolverOptions& options, const std::vector<char>& valid) {
  if (a_all.cols() != grid.unknowns()) throw ContractViolation("solve_linear: matrix does not match the grid");
  if (b_all.size() != a_all.rows()) throw ContractViolation("solve_linear: data does not match the matrix");
  if (!valid.empty() && valid.size() != static_cast<std::size_t>(a_all.rows())) {
    throw ContractViolation("solve_linear: validity mask does not match the data");
  }

  // Zero the flagged rows instead of removing them; the system is unchanged.
  Eigen::VectorXd row_weight = Eigen::VectorXd::Ones(a_all.rows());
  for (std::size_t r = 0; r < valid.size(); ++r)
    if (!valid[r]) row_weight(static_cast<Eigen::Index>(r)) = 0.0;
  const RayMatrix a = row_weight.asDiagonal() * a_all;
  const Eigen::VectorXd b = row_weight.cwiseProduct(b_all);

  Reconstruction rec;
  rec.rows_used = static_cast<int>(row_weight.sum());
  rec.reg_parameter = options.reg * normal_operator_norm(a);
  const Eigen::SparseMatrix<double> d = gradient_operator(grid);
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd y = a.transpose() * (a * x);
    if (rec.reg_parameter > 0.0) y += rec.reg_parameter * (d.transpose() * (d * x));
    return y;
  };

  const Eigen::VectorXd rhs = a.transpose() * b;
  const double rhs_norm = rhs.norm();
  rec.image = Eigen::VectorXd::Zero(grid.unknowns());
  if (rhs_norm == 0.0) {
    rec.converged = true;
    rec.residual_history.push_back(0.0);
    return rec;
  }

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  Eigen::VectorXd kr = apply(r);
  Eigen::VectorXd kp = kr;
  double rkr = r.dot(kr);
  double prev = 1.0;
  int increases = 0;
  rec.residual_history.push_back(1.0);
  for (int it = 0; it < options.max_iter; ++it) {
    const double kpkp = kp.squaredNorm();
    if (kpkp == 0.0 || rkr == 0.0) break;
    const double step = rkr / kpkp;
    rec.image += step * p;
    r -= step * kp;
    const double res = r.norm() / rhs_norm;
    rec.residual_history.push_back(res);
    rec.iterations = it + 1;
    increases = res > prev ? increases + 1 : 0;
    if (increases >= 10) {
      std::ostringstream os;
      os << "solver diverged after " << rec.iterations << " iterations (residual " << res << ")";
      throw SolverError(os.str());
    }
    prev = res;
    if (res < options.tol) {
      rec.converged = true;
      break;
    }
    kr = apply(r);
    const double rkr_new = r.dot(kr);
    const double beta = rkr_new / rkr;
    rkr = rkr_new;
    p = r + beta * p;
    kp = kr + beta * kp;
  }
  return rec;
}

} // namespace hflow
