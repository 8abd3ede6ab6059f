#include <doctest.h>

#include <cmath>
#include <random>

#include "hflow/errors.hpp"
#include "hflow/inversion.hpp"

using namespace hflow;

namespace {

const Domain kDisk = Domain::disk(Vec2::Zero(), 1.0);

Medium bumpy() {
  return Medium(kDisk, ScalarField::bumps(1.0, {{Vec2(0.1, 0.05), 0.3, 0.05}}, BoundaryBlend{kDisk, 0.1}));
}

Dataset peaks_only(const std::vector<double>& peaks) {
  Dataset d;
  for (double p : peaks) {
    PhaselessRecord r;
    r.peak_value = p;
    r.abs_u = {p};
    r.theta_b = {0.0};
    d.records.push_back(r);
  }
  return d;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = g(rng);
  return v;
}

struct Setup {
  PixelGrid grid{kDisk, 8, 8};
  RayMatrix a;
  Setup() {
    const Medium m = bumpy();
    const auto fan = sample_inward_sphere(kDisk, 32, 8, FanOptions{kPi / 3, 0.05, energy_shell_speed(m)});
    a = ray_matrix(trace_fan(fan, m), grid);
  }
};

} // namespace

TEST_CASE("extraction arithmetic") {
  const ExtractionResult e =
      extract_ray_integrals(peaks_only({std::exp(-0.5 * 1.0)}), peaks_only({std::exp(-0.5 * 1.1)}), 0.5);
  REQUIRE(e.values.size() == 1);
  CHECK(e.values[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(e.flagged == 0);
  CHECK(e.diagnostics[0].valid);
}

TEST_CASE("equal datasets extract to zero") {
  const Dataset d = peaks_only({0.3, 0.5, 0.7});
  const ExtractionResult e = extract_ray_integrals(d, d, 0.5);
  for (double v : e.values) CHECK(v == 0.0);
}

TEST_CASE("invalid peaks are flagged and excluded") {
  const ExtractionResult e = extract_ray_integrals(peaks_only({0.5, 0.5, 0.5}), peaks_only({0.5, 0.0, 0.4}), 0.5);
  CHECK(e.flagged == 1);
  CHECK_FALSE(e.diagnostics[1].valid);
  CHECK(std::isfinite(e.values[1]));
  CHECK(e.diagnostics[2].valid);
  CHECK_THROWS_AS(extract_ray_integrals(peaks_only({0.5, 0.5, 0.5}), peaks_only({0.0, 0.0, 0.4}), 0.5), Error);
}

TEST_CASE("extraction rejects incompatible inputs") {
  CHECK_THROWS_AS(extract_ray_integrals(peaks_only({0.5}), peaks_only({0.5, 0.5}), 0.5), ContractViolation);
  CHECK_THROWS_AS(extract_ray_integrals(peaks_only({0.5}), peaks_only({0.5}), 0.0), ContractViolation);
}

TEST_CASE("extracted sinogram is linear in the perturbation amplitude") {
  const Medium ref(kDisk, ScalarField::constant(1.0));
  const auto fan = sample_inward_sphere(kDisk, 8, 3, FanOptions{kPi / 3, 0.05, energy_shell_speed(ref)});
  SynthesisConfig c;
  c.beam.lambda = 1e3;
  auto perturbed = [&](double amp) {
    return Medium(kDisk, ScalarField::bumps(1.0, {{Vec2(0.15, 0.1), 0.25, amp}}, BoundaryBlend{kDisk, 0.1}));
  };
  const Dataset d0 = synthesize(ref, fan, c);
  const ExtractionResult e4 = extract_ray_integrals(d0, synthesize(perturbed(1e-4), fan, c), 0.5);
  const ExtractionResult e3 = extract_ray_integrals(d0, synthesize(perturbed(1e-3), fan, c), 0.5);
  const Eigen::Map<const Eigen::VectorXd> v4(e4.values.data(), static_cast<Eigen::Index>(e4.values.size()));
  const Eigen::Map<const Eigen::VectorXd> v3(e3.values.data(), static_cast<Eigen::Index>(e3.values.size()));
  CHECK(v3.norm() > 0.0);
  CHECK((v3 - 10.0 * v4).norm() <= 0.02 * v3.norm());
}

TEST_CASE("unregularized solve recovers exact data and matches a dense oracle") {
  const Setup s;
  const Eigen::VectorXd f = random_vector(s.grid.unknowns(), 3);
  const Eigen::VectorXd b = s.a * f;
  SolverOptions o;
  o.reg = 0.0;
  o.tol = 1e-14;
  const Reconstruction r = solve_linear(s.a, b, s.grid, o);
  CHECK(l2_error(s.grid, r.image, f) < 1e-6);

  const Eigen::MatrixXd ad(s.a);
  const Eigen::VectorXd dense = (ad.transpose() * ad).ldlt().solve(ad.transpose() * b);
  CHECK((r.image - dense).norm() <= 1e-8 * dense.norm());
}

TEST_CASE("regularized solve matches the dense regularized normal equations") {
  const Setup s;
  const Eigen::VectorXd b = s.a * random_vector(s.grid.unknowns(), 4) + 0.01 * random_vector(s.a.rows(), 5);
  SolverOptions o;
  o.reg = 1e-3;
  o.tol = 1e-13;
  const Reconstruction r = solve_linear(s.a, b, s.grid, o);
  const Eigen::MatrixXd ad(s.a), d(gradient_operator(s.grid));
  const Eigen::MatrixXd n = ad.transpose() * ad + r.reg_parameter * d.transpose() * d;
  const Eigen::VectorXd dense = n.ldlt().solve(ad.transpose() * b);
  CHECK((r.image - dense).norm() <= 1e-8 * dense.norm());
  CHECK(r.reg_parameter == doctest::Approx(1e-3 * normal_operator_norm(s.a)).epsilon(1e-6));
}

TEST_CASE("operator norm estimate") {
  const Setup s;
  const Eigen::MatrixXd ad(s.a);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ad.transpose() * ad);
  CHECK(normal_operator_norm(s.a, 200) == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-6));
}

TEST_CASE("zero data gives a zero image") {
  const Setup s;
  const Reconstruction r = solve_linear(s.a, Eigen::VectorXd::Zero(s.a.rows()), s.grid);
  CHECK(r.image.norm() == 0.0);
}

TEST_CASE("residual history is non-increasing") {
  const Setup s;
  const Eigen::VectorXd b = s.a * random_vector(s.grid.unknowns(), 6) + 0.05 * random_vector(s.a.rows(), 7);
  const Reconstruction r = solve_linear(s.a, b, s.grid);
  REQUIRE(r.residual_history.size() > 1);
  for (std::size_t k = 1; k < r.residual_history.size(); ++k) {
    CHECK(r.residual_history[k] <= r.residual_history[k - 1] * (1 + 1e-12));
  }
}

TEST_CASE("flagged rows are left out") {
  const Setup s;
  const Eigen::VectorXd f = random_vector(s.grid.unknowns(), 8);
  Eigen::VectorXd b = s.a * f;
  std::vector<char> valid(static_cast<std::size_t>(s.a.rows()), 1);
  for (Eigen::Index k = 0; k < b.size(); k += 7) {
    b(k) += 100.0;
    valid[static_cast<std::size_t>(k)] = 0;
  }
  SolverOptions o;
  o.reg = 0.0;
  o.tol = 1e-14;
  const Reconstruction r = solve_linear(s.a, b, s.grid, o, valid);
  CHECK(r.rows_used == static_cast<int>(std::count(valid.begin(), valid.end(), 1)));
  CHECK(l2_error(s.grid, r.image, f) < 1e-6);
}
