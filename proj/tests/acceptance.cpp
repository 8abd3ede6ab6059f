// Acceptance harness: one PASS/FAIL line per criterion, informational lines
// prefixed with "info". Usage: acceptance <path to hflow cli>.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "hflow/errors.hpp"
#include "hflow/experiments.hpp"

using namespace hflow;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kTauTol = 1e-8;
constexpr double kTauRuntime = 1.0;
constexpr double kEnergyTol = 1e-8;
constexpr double kRiccatiTol = 1e-8;
constexpr double kSymmetryTol = 1e-10;
constexpr double kConstraintTol = 1e-6;
constexpr double kResidualExponent = -0.25;
constexpr double kResidualSlopeTol = 0.5;
constexpr double kResidualRuntime = 120.0;
constexpr double kSpeedTol = 1e-6;
constexpr double kEquivalenceTol = 1e-6;
constexpr double kAdjointTol = 1e-10;
constexpr double kConstantTol = 1e-8;
constexpr double kRecoveryTol = 1e-6;
constexpr double kExtractionRel = 0.05;
constexpr double kReconstructionTol = 0.20;
constexpr double kSweepRuntime = 600.0;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void info(const std::string& what) {
  std::printf("  info: %s\n", what.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
void guarded(int id, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("threw: ") + e.what());
  }
}

const Domain kDisk = Domain::disk(Vec2::Zero(), 1.0);

// Test bump: amplitude 0.05, width 0.3, centred at (0.2, 0), blended to zero near the boundary.
ScalarField test_bump(const Domain& d, double sign) {
  return ScalarField::bumps(0.0, {{Vec2(0.2, 0.0), 0.3, sign * 0.05}}, BoundaryBlend{d, 0.1});
}

Medium bump_medium(const Domain& d) { return Medium(d, test_bump(d, 1.0).shifted(1.0)); }

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = g(rng);
  return v;
}

std::vector<SourceDirection> fan_in(const Medium& m, int points, int dirs) {
  return sample_inward_sphere(m.domain(), points, dirs, FanOptions{kPi / 3, 0.05, energy_shell_speed(m)});
}

// M0 (I + k s M0)^{-1} with M0 = i e_y e_y^T (diameter ray along x).
CMat2 closed_form(double s, double k) {
  CMat2 m0 = CMat2::Zero();
  m0(1, 1) = std::complex<double>(0, 1);
  return m0 * (CMat2::Identity() + k * s * m0).inverse();
}

struct ClosedFormError {
  double m = 0.0, a = 0.0;
};

// Error of the beam on the unit diameter ray against the closed form with factor k.
ClosedFormError riccati_error(RiccatiForm form, double k, double alpha) {
  const Medium m(kDisk, ScalarField::constant(1.0));
  SourceDirection src;
  src.x0 = Vec2(-1, 0);
  src.omega0 = Vec2(1, 0);
  BeamConfig c;
  c.riccati = form;
  c.alpha = alpha;
  const BeamState b = propagate_beam(trace(src, m), c, m);
  ClosedFormError e;
  for (const BeamSample& s : b.samples) {
    e.m = std::max(e.m, (s.m - closed_form(s.s, k)).norm());
    const double amp = std::exp(-alpha * s.s) * std::pow(1 + k * k * s.s * s.s, -0.5 / k);
    e.a = std::max(e.a, std::abs(std::exp(s.log_amplitude.real()) - amp));
  }
  return e;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion1() {
  const Medium m(kDisk, ScalarField::constant(1.0));
  const auto t0 = std::chrono::steady_clock::now();
  double err = 0.0;
  for (int k = 0; k < 32; ++k) {
    const double theta = -1.45 + 2.9 * k / 31;
    SourceDirection s;
    s.x0 = Vec2(-1, 0);
    s.omega0 = Vec2(std::cos(theta), std::sin(theta));
    err = std::max(err, std::abs(trace(s, m).tau - std::cos(theta)));
  }
  const double dt = seconds_since(t0);
  report(1, err < kTauTol && dt < kTauRuntime,
         fmt("exit time tau = cos(theta) over 32 angles: max err %.3e (tol %.0e), %.3f s (limit %.0f s)", err, kTauTol,
             dt, kTauRuntime));
}

void criterion2(const ExperimentConfig& cfg) {
  const Medium m = bump_medium(cfg.domain);
  const auto fan = make_fan(cfg, m);
  TraceOptions opt = cfg.synthesis.trace;
  opt.step = 1e-3;
  double drift = 0.0;
  for (const RayPath& r : trace_fan(fan, m, opt)) {
    for (const RaySample& s : r.samples) drift = std::max(drift, std::abs(m.hamiltonian(s.x, s.p) - r.energy0));
  }
  report(2, fan.size() == 512 && drift < kEnergyTol,
         fmt("energy drift over %zu bump-medium rays at h = 1e-3: %.3e (tol %.0e)", fan.size(), drift, kEnergyTol));
}

void criterion3(const ExperimentConfig& cfg) {
  const RiccatiForm form = cfg.synthesis.beam.riccati;
  const ClosedFormError e = riccati_error(form, 4.0, 0.5);
  report(3, e.m < kRiccatiTol && e.a < kRiccatiTol,
         fmt("%s Riccati vs M0(I+4sM0)^-1: max |M err| %.3e, max |a err| %.3e (tol %.0e)",
             form == RiccatiForm::hamiltonian ? "hamiltonian" : "homogenized", e.m, e.a, kRiccatiTol));
  const ClosedFormError h2 = riccati_error(RiccatiForm::hamiltonian, 2.0, 0.5);
  const ClosedFormError g4 = riccati_error(RiccatiForm::homogenized, 4.0, 0.5);
  info(fmt("hamiltonian form vs M0(I+2sM0)^-1 and (1+4s^2)^-1/4 e^-as: %.3e, %.3e", h2.m, h2.a));
  info(fmt("homogenized form vs M0(I+4sM0)^-1 and (1+16s^2)^-1/8 e^-as: %.3e, %.3e", g4.m, g4.a));
}

void criterion4(const ExperimentConfig& cfg) {
  const Medium m = bump_medium(cfg.domain);
  const auto fan = make_fan(cfg, m);
  double asym = 0.0, cons = 0.0, im = 1e300;
  for (const SourceDirection& src : fan) {
    const BeamState b = propagate_beam(trace(src, m, cfg.synthesis.trace), cfg.synthesis.beam, m);
    asym = std::max(asym, b.max_asymmetry);
    cons = std::max(cons, b.max_constraint_error);
    im = std::min(im, b.min_transverse_imag);
  }
  report(4, asym < kSymmetryTol && cons < kConstraintTol && im > 0.0,
         fmt("%zu beams at h = %.0e: asymmetry %.3e (tol %.0e), |M x' - p'| %.3e (tol %.0e), min Im M on x'^perp %.3e (> 0)",
             fan.size(), cfg.synthesis.trace.step, asym, kSymmetryTol, cons, kConstraintTol, im));
}

void criterion5(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ResidualScanReport rep = run_residual_scan(cfg, reference_medium(cfg));
  const double dt = seconds_since(t0);
  std::string norms;
  for (const auto& r : rep.rows) norms += fmt(" %.4g", r.residual_norm);
  report(5, rep.slope < 0.0 && std::abs(rep.slope - kResidualExponent) < kResidualSlopeTol && dt < kResidualRuntime,
         fmt("residual slope %.4f vs derived %.2f (tol %.1f), norms%s, %.1f s (limit %.0f s)", rep.slope,
             kResidualExponent, kResidualSlopeTol, norms.c_str(), dt, kResidualRuntime));
}

void criterion6(const ExperimentConfig& cfg) {
  // Potential form with H0 = 1 and q = -bump: the traced beam-form medium has n^2 = H0 - q.
  const EnergyConvention conv = EnergyConvention::potential(1.0);
  const ScalarField q = test_bump(cfg.domain, -1.0);
  const Medium m(cfg.domain, conv.beam_n2(q));
  const auto fan = make_fan(cfg, m);
  const ScalarField f = ScalarField::bumps(0.5, {{Vec2(0.1, -0.2), 0.3, 1.0}});
  double speed = 0.0, gap = 0.0;
  int rays = 0;
  for (std::size_t k = 0; k < fan.size() && rays < 100; k += 5, ++rays) {
    const RayPath ray = trace(fan[k], m, cfg.synthesis.trace);
    speed = std::max(speed, maupertuis_reparametrize(ray, m).max_speed_error);
    gap = std::max(gap, weighted_equivalence_check([&](const Vec2& x) { return f.value(x); }, ray, m).gap);
  }
  report(6, rays == 100 && speed < kSpeedTol && gap < kEquivalenceTol,
         fmt("%d bump-potential rays: max | |sigma'| - 1 | %.3e (tol %.0e), weighted identity gap %.3e (tol %.0e)", rays,
             speed, kSpeedTol, gap, kEquivalenceTol));
}

void criterion7(const ExperimentConfig& cfg) {
  const Medium m = bump_medium(cfg.domain);

  const auto fan60 = fan_in(m, 15, 4);
  const PixelGrid g16(cfg.domain, 16, 16);
  const RayMatrix a16 = ray_matrix(trace_fan(fan60, m), g16);
  const Eigen::VectorXd f = random_vector(g16.unknowns(), 1), sigma = random_vector(a16.rows(), 2);
  const double lhs = (a16 * f).dot(sigma);
  const double adj = std::abs(lhs - f.dot(backproject(a16, sigma))) / std::max(1.0, std::abs(lhs));

  const auto fan = make_fan(cfg, m);
  const Sinogram s = flow_transform(ScalarField::constant(1.7), fan, m, {}, cfg.synthesis.trace);
  double cerr = 0.0;
  for (std::size_t k = 0; k < fan.size(); ++k) cerr = std::max(cerr, std::abs(s.values[k] - 1.7 * s.taus[k]));

  const PixelGrid g8(cfg.domain, 8, 8);
  const Eigen::MatrixXd a8 = Eigen::MatrixXd(ray_matrix(trace_fan(fan_in(m, 32, 8), m), g8));
  double rec = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd x = random_vector(g8.unknowns(), 100 + seed);
    rec = std::max(rec, l2_error(g8, a8.colPivHouseholderQr().solve(a8 * x), x));
  }
  const double over = double(a8.rows()) / double(a8.cols());
  report(7, adj < kAdjointTol && cerr < kConstantTol && rec < kRecoveryTol && over >= 4.0,
         fmt("adjoint gap %.3e (tol %.0e), |I c - c tau| %.3e (tol %.0e), 8x8 recovery %.3e (tol %.0e, %.1fx rays)", adj,
             kAdjointTol, cerr, kConstantTol, rec, kRecoveryTol, over));
}

void criterion8(const ExperimentConfig& cfg, const PipelineGeometry& geo) {
  const double lambda = 1e4, eps = 1e-3;
  const PipelineResult r = run_pipeline(cfg, geo, lambda, eps, 0.0);
  const Sinogram truth = flow_transform(perturbation_field(cfg, eps), geo.fan, geo.rays);
  const double abs_tol = 1.0 / std::sqrt(lambda);
  double worst = 0.0, diff2 = 0.0, norm2 = 0.0, dot = 0.0, bb = 0.0;
  int bad = 0;
  for (std::size_t k = 0; k < truth.values.size(); ++k) {
    const double t = truth.values[k], b = r.extraction.values[k];
    const double tol = std::max(kExtractionRel * std::abs(t), abs_tol);
    worst = std::max(worst, std::abs(b - t) / tol);
    if (std::abs(b - t) > tol) ++bad;
    diff2 += (b - t) * (b - t);
    norm2 += t * t;
    dot += b * t;
    bb += b * b;
  }
  report(8, bad == 0,
         fmt("extracted vs forward sinogram at lambda 1e4, amp 1e-3: %d of %zu rays outside max(5%%, %.0e abs), "
             "worst err/tol %.3f",
             bad, truth.values.size(), abs_tol, worst));
  info(fmt("relative sinogram error %.3f, least-squares gain <b,I>/<I,I> %.3f, correlation %.3f, flagged %d",
           std::sqrt(diff2 / norm2), dot / norm2, dot / std::sqrt(norm2 * bb), r.extraction.flagged));
}

void criterion9(const ExperimentConfig& cfg, const PipelineGeometry& geo) {
  const auto t0 = std::chrono::steady_clock::now();
  const StabilityReport rep = run_stability_sweep(cfg);
  const double dt = seconds_since(t0);
  auto row = [&](double lambda, double eps, double noise) -> const StabilityRow* {
    for (const auto& r : rep.rows)
      if (r.lambda == lambda && r.eps == eps && r.noise == noise) return &r;
    return nullptr;
  };
  const StabilityRow* head = row(1e4, 1e-2, 0.0);
  bool rows_ok = head && head->ok;
  bool dec_lambda = true, inc_noise = true;
  std::string lam_str, noise_str;
  double prev = 0.0;
  for (std::size_t k = 0; k < cfg.sweep.lambda_list.size(); ++k) {
    const StabilityRow* r = row(cfg.sweep.lambda_list[k], 1e-2, 0.0);
    rows_ok = rows_ok && r && r->ok;
    if (!r) continue;
    lam_str += fmt(" %.4g", r->rel_error);
    if (k > 0 && !(r->rel_error < prev)) dec_lambda = false;
    prev = r->rel_error;
  }
  for (std::size_t k = 0; k < cfg.sweep.noise_list.size(); ++k) {
    const StabilityRow* r = row(1e4, 1e-2, cfg.sweep.noise_list[k]);
    rows_ok = rows_ok && r && r->ok;
    if (!r) continue;
    noise_str += fmt(" %.4g", r->rel_error);
    if (k > 0 && !(r->rel_error > prev)) inc_noise = false;
    prev = r->rel_error;
  }
  const double err = head ? head->rel_error : NAN;
  report(9, rows_ok && err < kReconstructionTol && dec_lambda && inc_noise && dt < kSweepRuntime,
         fmt("rel L2 error %.4g at lambda 1e4, eps 1e-2 (tol %.2f); over lambda%s (%s); over noise%s (%s); sweep %.1f s",
             err, kReconstructionTol, lam_str.c_str(), dec_lambda ? "decreasing" : "not decreasing", noise_str.c_str(),
             inc_noise ? "increasing" : "not increasing", dt));
  for (const auto& r : rep.rows) {
    info(fmt("lambda %.0e eps %.0e noise %.0e: delta %.4e rel_error %.4g iterations %d", r.lambda, r.eps, r.noise,
             r.delta, r.rel_error, r.iterations));
  }

  const Eigen::VectorXd truth = geo.grid.sample(perturbation_field(cfg, 1e-2));
  const Reconstruction exact = solve_linear(geo.matrix, geo.matrix * truth, geo.grid, cfg.inversion);
  info(fmt("same solver on exact transform data A*truth: rel L2 error %.4g", l2_error(geo.grid, exact.image, truth)));
  ExperimentConfig alt = cfg;
  alt.synthesis.beam.riccati = cfg.synthesis.beam.riccati == RiccatiForm::hamiltonian ? RiccatiForm::homogenized
                                                                                      : RiccatiForm::hamiltonian;
  info(fmt("with the other Riccati form at lambda 1e4, eps 1e-2: rel L2 error %.4g",
           run_pipeline(alt, geo, 1e4, 1e-2, 0.0).rel_error));
}

void criterion10(const std::string& cli, const std::string& config) {
  const fs::path root = fs::temp_directory_path() / "hflow_acceptance";
  fs::remove_all(root);
  const fs::path a = root / "a", b = root / "b";
  auto run = [&](const fs::path& out) {
    const std::string cmd = cli + " run-all --config " + config + " --out " + out.string() + " > " +
                            (root / (out.filename().string() + ".log")).string() + " 2>&1";
    return std::system(cmd.c_str());
  };
  fs::create_directories(root);
  const int sa = run(a), sb = run(b);
  int files = 0, differing = 0;
  if (fs::exists(a)) {
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = b / fs::relative(e.path(), a);
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
  }
  report(10, sa == 0 && sb == 0 && files > 0 && differing == 0,
         fmt("run-all twice with the same seed: %d CSV files, %d differ, exit codes %d/%d", files, differing, sa, sb));
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <hflow cli> [config]\n");
    return 2;
  }
  const std::string cli = argv[1];
  const std::string config = argc > 2 ? argv[2] : "configs/default.json";
  const ExperimentConfig cfg = load_config(config);

  guarded(1, [&] { criterion1(); });
  guarded(2, [&] { criterion2(cfg); });
  guarded(3, [&] { criterion3(cfg); });
  guarded(4, [&] { criterion4(cfg); });
  guarded(5, [&] { criterion5(cfg); });
  guarded(6, [&] { criterion6(cfg); });
  guarded(7, [&] { criterion7(cfg); });
  const PipelineGeometry geo = prepare_pipeline(cfg);
  guarded(8, [&] { criterion8(cfg, geo); });
  guarded(9, [&] { criterion9(cfg, geo); });
  guarded(10, [&] { criterion10(cli, config); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
