#include "hflow/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hflow/errors.hpp"

namespace hflow {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a(ss.str()));
}

} // namespace

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << fmt(row[k]);
    out << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  CsvTable t;
  std::string line, cell;
  if (std::getline(in, line)) {
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable ray_table(const RayPath& ray) {
  CsvTable t{{"s", "x", "y", "px", "py"}, {}};
  for (const auto& r : ray.samples) t.rows.push_back({r.s, r.x(0), r.x(1), r.p(0), r.p(1)});
  return t;
}

CsvTable exit_table(const std::vector<SourceDirection>& fan, const std::vector<RayPath>& rays) {
  CsvTable t{{"theta_index", "dir_index", "theta", "angle", "tau"}, {}};
  for (std::size_t k = 0; k < fan.size(); ++k) {
    t.rows.push_back({double(fan[k].theta_index), double(fan[k].dir_index), fan[k].theta, fan[k].angle, rays[k].tau});
  }
  return t;
}

CsvTable beam_table(const BeamState& beam) {
  CsvTable t{{"s", "x", "y", "ReM11", "ImM11", "ReM12", "ImM12", "ReM22", "ImM22", "abs_a0", "S"}, {}};
  for (const auto& b : beam.samples) {
    t.rows.push_back({b.s, b.x(0), b.x(1), b.m(0, 0).real(), b.m(0, 0).imag(), b.m(0, 1).real(), b.m(0, 1).imag(),
                      b.m(1, 1).real(), b.m(1, 1).imag(), std::exp(b.log_amplitude.real()), b.phase});
  }
  return t;
}

CsvTable boundary_table(const BoundaryTrace& trace) {
  CsvTable t{{"theta_b", "absU"}, {}};
  for (std::size_t k = 0; k < trace.theta.size(); ++k) t.rows.push_back({trace.theta[k], trace.abs_u[k]});
  return t;
}

CsvTable sinogram_table(const std::vector<double>& taus, const std::vector<double>& values) {
  CsvTable t{{"source_idx", "tau", "value"}, {}};
  for (std::size_t k = 0; k < values.size(); ++k) t.rows.push_back({double(k), taus[k], values[k]});
  return t;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractViolation("loglog_slope: need two or more points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]) / n, my += std::log(y[k]) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

SourceDirection probe_source(const Domain& domain) {
  const BoundaryPoint b = domain.boundary_point(kPi);
  SourceDirection src;
  src.x0 = b.point;
  src.omega0 = b.inward_normal;
  src.theta = kPi;
  return src;
}

CsvTable ResidualScanReport::table() const {
  CsvTable t{{"lambda", "residual_norm", "field_norm", "points", "slope"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.lambda, r.residual_norm, r.field_norm, double(r.points), slope});
  return t;
}

ResidualScanReport run_residual_scan(const ExperimentConfig& cfg, const Medium& medium) {
  const auto& list = cfg.residual_scan.lambda_list;
  if (list.size() < 3 || list.back() / list.front() < 100.0) {
    throw ConfigError("residual_scan.lambda_list needs at least 3 entries spanning 2 decades");
  }
  const RayPath ray = trace(probe_source(medium.domain()), medium, cfg.synthesis.trace);
  ResidualScanReport rep;
  std::vector<double> lam, norm;
  for (double lambda : list) {
    BeamConfig bc = cfg.synthesis.beam;
    bc.lambda = lambda;
    const BeamField field(propagate_beam(ray, bc, medium));
    rep.rows.push_back(helmholtz_residual(field, medium, cfg.residual_scan.options));
    lam.push_back(lambda);
    norm.push_back(rep.rows.back().residual_norm);
  }
  rep.slope = loglog_slope(lam, norm);
  rep.monotone = true;
  for (std::size_t k = 1; k < norm.size(); ++k) rep.monotone = rep.monotone && norm[k] < norm[k - 1];
  return rep;
}

CsvTable StabilityReport::table() const {
  CsvTable t{{"lambda", "eps", "noise", "delta", "rel_error", "slope", "iterations", "flagged", "ok", "in_regime"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.lambda, r.eps, r.noise, r.delta, r.rel_error, r.slope, double(r.iterations), double(r.flagged),
                      r.ok ? 1.0 : 0.0, r.lambda * r.eps > 1.0 ? 1.0 : 0.0});
  }
  return t;
}

PipelineGeometry prepare_pipeline(const ExperimentConfig& cfg) {
  Medium ref = reference_medium(cfg);
  std::vector<SourceDirection> fan = make_fan(cfg, ref);
  std::vector<RayPath> rays = trace_fan(fan, ref, cfg.synthesis.trace);
  PixelGrid grid(cfg.domain, cfg.grid_n, cfg.grid_n);
  RayMatrix a = ray_matrix(rays, grid);
  return {std::move(ref), std::move(fan), std::move(rays), std::move(grid), std::move(a)};
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, const PipelineGeometry& geo, double lambda, double eps,
                            double noise, const Dataset* reference, const Dataset* measured) {
  SynthesisConfig sc = cfg.synthesis;
  sc.beam.lambda = lambda;
  PipelineResult res;
  res.reference = reference ? *reference : synthesize(geo.reference, geo.fan, sc);
  const Dataset clean = measured ? *measured : synthesize(perturbed_medium(cfg, eps), geo.fan, sc);
  res.measured = add_noise(clean, noise, cfg.seed);
  res.delta = sup_difference(res.reference, res.measured);
  res.extraction = extract_ray_integrals(res.reference, res.measured, sc.beam.alpha);
  std::vector<char> valid(res.extraction.diagnostics.size());
  for (std::size_t k = 0; k < valid.size(); ++k) valid[k] = res.extraction.diagnostics[k].valid ? 1 : 0;
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(res.extraction.values.data(),
                                                              static_cast<Eigen::Index>(res.extraction.values.size()));
  res.reconstruction = solve_linear(geo.matrix, b, geo.grid, cfg.inversion, valid);
  res.truth = geo.grid.sample(perturbation_field(cfg, eps));
  res.rel_error = l2_error(geo.grid, res.reconstruction.image, res.truth);
  return res;
}

StabilityReport run_stability_sweep(const ExperimentConfig& cfg, int /*jobs*/) {
  const PipelineGeometry geo = prepare_pipeline(cfg);
  StabilityReport rep;
  for (double lambda : cfg.sweep.lambda_list) {
    SynthesisConfig sc = cfg.synthesis;
    sc.beam.lambda = lambda;
    std::optional<Dataset> ref;
    std::string ref_error;
    try {
      ref = synthesize(geo.reference, geo.fan, sc);
    } catch (const Error& e) {
      ref_error = e.what();
    }
    for (double eps : cfg.sweep.eps_list) {
      std::optional<Dataset> meas;
      std::string meas_error = ref_error;
      if (ref) {
        try {
          meas = synthesize(perturbed_medium(cfg, eps), geo.fan, sc);
        } catch (const Error& e) {
          meas_error = e.what();
        }
      }
      for (double noise : cfg.sweep.noise_list) {
        StabilityRow row;
        row.lambda = lambda;
        row.eps = eps;
        row.noise = noise;
        const auto t0 = std::chrono::steady_clock::now();
        if (!meas) {
          row.error = meas_error;
        } else {
          try {
            const PipelineResult r = run_pipeline(cfg, geo, lambda, eps, noise, &*ref, &*meas);
            row.delta = r.delta;
            row.rel_error = r.rel_error;
            row.iterations = r.reconstruction.iterations;
            row.flagged = r.extraction.flagged;
            row.ok = true;
          } catch (const Error& e) {
            row.error = e.what();
          }
        }
        row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.rows.push_back(row);
      }
    }
  }
  std::map<std::pair<double, double>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < rep.rows.size(); ++k)
    if (rep.rows[k].ok && rep.rows[k].rel_error > 0.0) groups[{rep.rows[k].eps, rep.rows[k].noise}].push_back(k);
  for (const auto& [key, idx] : groups) {
    if (idx.size() < 2) continue;
    std::vector<double> x, y;
    for (std::size_t k : idx) x.push_back(rep.rows[k].lambda), y.push_back(rep.rows[k].rel_error);
    const double slope = loglog_slope(x, y);
    for (std::size_t k : idx) rep.rows[k].slope = slope;
  }
  return rep;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a(cfg.source.dump())); }

int run_all(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs) {
  std::filesystem::create_directories(out);
  std::vector<std::filesystem::path> files;
  int status = 0;
  auto stage = [&](const std::string& name) { std::fprintf(stderr, "[run-all] %s\n", name.c_str()); };

  stage("trace");
  const PipelineGeometry geo = prepare_pipeline(cfg);
  exit_table(geo.fan, geo.rays).write(out / "exit_times.csv");
  files.push_back("exit_times.csv");

  stage("beam");
  {
    const RayPath ray = trace(probe_source(cfg.domain), geo.reference, cfg.synthesis.trace);
    const BeamField field(propagate_beam(ray, cfg.synthesis.beam, geo.reference));
    beam_table(field.beam()).write(out / "probe_beam.csv");
    boundary_table(boundary_trace(field, cfg.domain, cfg.synthesis.sampling)).write(out / "probe_boundary.csv");
    files.push_back("probe_beam.csv");
    files.push_back("probe_boundary.csv");
  }

  stage("transform");
  const double eps_max = cfg.sweep.eps_list.back();
  {
    const Sinogram sino = flow_transform(perturbation_field(cfg, eps_max), geo.fan, geo.rays);
    sinogram_table(sino.taus, sino.values).write(out / "sinogram_truth.csv");
    files.push_back("sinogram_truth.csv");
  }

  stage("residual-scan");
  const ResidualScanReport scan = run_residual_scan(cfg, geo.reference);
  scan.table().write(out / "residual_scan.csv");
  files.push_back("residual_scan.csv");
  if (!scan.monotone || !(scan.slope < 0.0)) {
    std::fprintf(stderr, "[run-all] residual scan flagged: slope %.4f, monotone %d\n", scan.slope, int(scan.monotone));
    status = 1;
  }

  stage("stability");
  const StabilityReport rep = run_stability_sweep(cfg, jobs);
  rep.table().write(out / "stability.csv");
  files.push_back("stability.csv");
  nlohmann::ordered_json timing = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    timing.push_back({{"lambda", r.lambda}, {"eps", r.eps}, {"noise", r.noise}, {"runtime_s", r.runtime},
                      {"error", r.error}});
    if (!r.ok) {
      std::fprintf(stderr, "[run-all] stability row lambda=%g eps=%g noise=%g failed: %s\n", r.lambda, r.eps, r.noise,
                   r.error.c_str());
      status = 1;
    }
  }
  std::ofstream(out / "stability_timing.json") << timing.dump(2) << '\n';

  stage("invert");
  {
    const PipelineResult r =
        run_pipeline(cfg, geo, cfg.sweep.lambda_list.back(), eps_max, cfg.sweep.noise_list.front());
    write_grid_image(geo.grid, r.reconstruction.image, out / "reconstruction.csv");
    write_grid_image(geo.grid, r.truth, out / "truth.csv");
    std::vector<double> taus;
    for (const auto& rec : r.reference.records) taus.push_back(rec.tau);
    sinogram_table(taus, r.extraction.values).write(out / "sinogram_extracted.csv");
    files.push_back("reconstruction.csv");
    files.push_back("truth.csv");
    files.push_back("sinogram_extracted.csv");
  }

  nlohmann::ordered_json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = config_hash(cfg);
  manifest["seed"] = cfg.seed;
  manifest["config"] = cfg.source;
  nlohmann::ordered_json list = nlohmann::ordered_json::object();
  for (const auto& f : files) list[f.string()] = file_hash(out / f);
  manifest["outputs"] = list;
  manifest["status"] = status;
  std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
  return status;
}

} // namespace hflow
