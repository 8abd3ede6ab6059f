#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "hflow/errors.hpp"
#include "hflow/measurement.hpp"

using namespace hflow;

namespace {

const Domain kDisk = Domain::disk(Vec2::Zero(), 1.0);

Medium flat() { return Medium(kDisk, ScalarField::constant(1.0)); }

Medium bumped(double amp) {
  return Medium(kDisk, ScalarField::bumps(1.0, {{Vec2(0.15, 0.1), 0.25, amp}}, BoundaryBlend{kDisk, 0.1}));
}

std::vector<SourceDirection> small_fan(const Medium& m, int points = 8, int dirs = 3) {
  return sample_inward_sphere(kDisk, points, dirs, FanOptions{kPi / 3, 0.05, energy_shell_speed(m)});
}

SynthesisConfig small_config(double lambda = 1e3) {
  SynthesisConfig c;
  c.beam.lambda = lambda;
  c.sampling.nodes = 360;
  return c;
}

bool same_records(const Dataset& a, const Dataset& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    const PhaselessRecord &r = a.records[k], &q = b.records[k];
    if (r.abs_u != q.abs_u || r.theta_b != q.theta_b || r.peak_value != q.peak_value ||
        r.peak_theta != q.peak_theta || r.tau != q.tau || r.degenerate != q.degenerate) {
      return false;
    }
  }
  return true;
}

} // namespace

TEST_CASE("normal sources in a constant disk give equal peaks") {
  const Medium m = flat();
  const auto fan = sample_inward_sphere(kDisk, 8, 1);
  SynthesisConfig c;
  const Dataset d = synthesize(m, fan, c);
  REQUIRE(d.records.size() == 8);
  double lo = 1e300, hi = 0.0;
  for (const PhaselessRecord& r : d.records) {
    lo = std::min(lo, r.peak_value);
    hi = std::max(hi, r.peak_value);
    CHECK(*std::min_element(r.abs_u.begin(), r.abs_u.end()) >= 0.0);
  }
  CHECK(hi - lo < 1e-10);
}

TEST_CASE("equal media give identical datasets") {
  const Medium a = bumped(0.05), b = bumped(0.05);
  const auto fan = small_fan(a);
  const Dataset da = synthesize(a, fan, small_config()), db = synthesize(b, fan, small_config());
  CHECK(same_records(da, db));
  CHECK(da.fingerprint == db.fingerprint);
  CHECK(sup_difference(da, db) == 0.0);
}

TEST_CASE("dataset records match single-beam synthesis in fan order") {
  const Medium m = bumped(0.05);
  const auto fan = small_fan(m);
  const SynthesisConfig c = small_config();
  const Dataset d = synthesize(m, fan, c);
  REQUIRE(d.records.size() == fan.size());
  for (std::size_t k = 0; k < fan.size(); k += 5) {
    const BeamField f(propagate_beam(trace(fan[k], m, c.trace), c.beam, m));
    const BoundaryTrace tr = boundary_trace(f, kDisk, c.sampling);
    CHECK(std::abs(d.records[k].peak_value - tr.peak_value) < 1e-8);
    CHECK(d.records[k].source.theta_index == fan[k].theta_index);
    CHECK(d.records[k].source.dir_index == fan[k].dir_index);
  }
}

TEST_CASE("sup difference is symmetric and shrinks with the perturbation") {
  const Medium ref = flat();
  const auto fan = small_fan(ref);
  const SynthesisConfig c = small_config();
  const Dataset d0 = synthesize(ref, fan, c);
  std::vector<double> deltas;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Dataset d = synthesize(bumped(eps), fan, c);
    const double delta = sup_difference(d0, d);
    CHECK(delta == sup_difference(d, d0));
    CHECK(delta > 0.0);
    deltas.push_back(delta);
  }
  CHECK(deltas[1] < deltas[0]);
  CHECK(deltas[2] < deltas[1]);
}

TEST_CASE("sup difference rejects mismatched fans") {
  const Medium m = flat();
  const Dataset a = synthesize(m, small_fan(m, 4, 1), small_config());
  const Dataset b = synthesize(m, small_fan(m, 5, 1), small_config());
  CHECK_THROWS_AS(sup_difference(a, b), ContractViolation);
}

TEST_CASE("noise model") {
  const Medium m = bumped(0.05);
  const Dataset d = synthesize(m, small_fan(m), small_config());
  CHECK(same_records(add_noise(d, 0.0, 7), d));

  const Dataset n1 = add_noise(d, 1e-3, 7), n2 = add_noise(d, 1e-3, 7), n3 = add_noise(d, 1e-3, 8);
  CHECK(same_records(n1, n2));
  CHECK_FALSE(same_records(n1, n3));

  double max_peak = 0.0;
  for (const auto& r : d.records) max_peak = std::max(max_peak, r.peak_value);
  CHECK(sup_difference(d, n1) <= 1e-3 * max_peak + 1e-12);
  for (const auto& r : n1.records) CHECK(*std::min_element(r.abs_u.begin(), r.abs_u.end()) >= 0.0);
}

TEST_CASE("trapped sources are reported together") {
  const Medium m = flat();
  SynthesisConfig c = small_config();
  c.trace.max_parameter_factor = 0.01;
  try {
    synthesize(m, small_fan(m, 4, 1), c);
    FAIL("expected TrappedRayError");
  } catch (const TrappedRayError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("4") != std::string::npos);
  }
}

TEST_CASE("dataset files round trip") {
  const Medium m = bumped(0.05);
  const Dataset d = synthesize(m, small_fan(m, 4, 2), small_config());
  const auto dir = std::filesystem::temp_directory_path() / "hflow_test_dataset";
  std::filesystem::remove_all(dir);
  write_dataset(d, dir);
  const Dataset r = read_dataset(dir);
  CHECK(same_records(d, r));
  CHECK(r.fingerprint == d.fingerprint);
  CHECK(r.config.beam.lambda == d.config.beam.lambda);
  CHECK(r.config.sampling.nodes == d.config.sampling.nodes);
  for (std::size_t k = 0; k < d.records.size(); ++k) {
    CHECK((r.records[k].source.x0 - d.records[k].source.x0).norm() == 0.0);
    CHECK((r.records[k].source.omega0 - d.records[k].source.omega0).norm() == 0.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}
