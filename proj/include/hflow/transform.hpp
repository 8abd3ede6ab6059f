#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "hflow/grid.hpp"
#include "hflow/ray.hpp"

namespace hflow {

/// Composite Simpson weights on an arbitrary increasing node sequence. Pairs
/// of intervals use the nonuniform Simpson rule; an odd leftover interval
/// at the end is integrated with the quadratic through the last three nodes.
std::vector<double> simpson_weights(const std::vector<double>& nodes);

enum class EnergyForm { beam, potential };

/// Beam form: H = |p|_g^2 - n^2 at H0 = 0, flow parameter s.
/// Potential form: H = |p|_g^2 / 2 + q at energy H0 > max q. Its flow is
/// traced as the beam form with n^2 = H0 - q, p_pot = sqrt(2) p_beam and
/// t = sqrt(2) s; `time_scale` is dt/ds.
struct EnergyConvention {
  EnergyForm form = EnergyForm::beam;
  double H0 = 0.0;

  static EnergyConvention beam() { return {}; }
  static EnergyConvention potential(double h0) { return {EnergyForm::potential, h0}; }

  double time_scale() const;
  /// n^2 of the beam-form medium generating the same curves.
  ScalarField beam_n2(const ScalarField& q) const;
};

struct Sinogram {
  std::vector<SourceDirection> fan;
  std::vector<double> values;
  std::vector<double> taus;
  EnergyConvention convention;
};

/// time_scale * integral of f along the stored samples (composite Simpson in s).
double integrate_along(const RayPath& ray, const std::function<double(const Vec2&)>& f, double time_scale = 1.0);

/// Traces the fan in `medium` and integrates f along every ray.
Sinogram flow_transform(const ScalarField& f, const std::vector<SourceDirection>& fan, const Medium& medium,
                        const EnergyConvention& conv = {}, const TraceOptions& options = {});
/// Same, on precomputed rays.
Sinogram flow_transform(const ScalarField& f, const std::vector<SourceDirection>& fan, const std::vector<RayPath>& rays,
                        const EnergyConvention& conv = {});

using RayMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row r holds the Simpson weights of ray r splatted bilinearly onto the
/// masked pixels, so that (A x)_r is the transform of the bilinear image x.
RayMatrix ray_matrix(const std::vector<RayPath>& rays, const PixelGrid& grid, double time_scale = 1.0);

/// A^T sigma, the exact adjoint of the discretized forward transform.
Eigen::VectorXd backproject(const RayMatrix& a, const Eigen::VectorXd& sigma);

/// Maupertuis reparametrization of a ray by the arc length of
/// g~ = 2 (H0 - q) g, resampled at uniform sigma. Uses the potential-form
/// time t = sqrt(2) s and N = H0 - q (= n^2 of the traced medium).
struct MaupertuisCurve {
  std::vector<double> sigma;   // uniform nodes in [0, length]
  std::vector<double> s;       // ray parameter at each node
  std::vector<Vec2> x;
  std::vector<double> speed;   // |dx/dsigma|_g~ at each node
  double length = 0.0;         // g~-length = sigma(tau)
  double max_speed_error = 0.0;
  double time_scale = 0.0;     // dt/ds
};

MaupertuisCurve maupertuis_reparametrize(const RayPath& ray, const Medium& medium, int nodes = 0);

struct EquivalenceCheck {
  double lhs = 0.0;  // integral of f dt
  double rhs = 0.0;  // integral of f / (2 N) dsigma
  double gap = 0.0;
};

/// Both sides of I f = I~[f / 2(H0 - q)] by independent quadratures.
EquivalenceCheck weighted_equivalence_check(const std::function<double(const Vec2&)>& f, const RayPath& ray,
                                            const Medium& medium, int nodes = 0);

} // namespace hflow
