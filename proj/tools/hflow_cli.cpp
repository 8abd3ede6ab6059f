#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "hflow/errors.hpp"
#include "hflow/experiments.hpp"

using namespace hflow;

namespace {

struct Globals {
  std::string config = "configs/default.json";
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig cfg = load_config(g.config);
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.source["seed"] = *g.seed;
  }
  if (g.jobs > 0) omp_set_num_threads(g.jobs);
  return cfg;
}

void parse_fan(const std::string& spec, ExperimentConfig& cfg) {
  const auto x = spec.find('x');
  if (x == std::string::npos) throw ConfigError("--fan must look like 64x8");
  cfg.fan.points = std::stoi(spec.substr(0, x));
  cfg.fan.directions = std::stoi(spec.substr(x + 1));
  cfg.source["fan"]["points"] = cfg.fan.points;
  cfg.source["fan"]["directions"] = cfg.fan.directions;
}

void report(const char* what, const std::filesystem::path& p) { std::printf("%s: %s\n", what, p.string().c_str()); }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-beam phaseless tomography toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "configuration file")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--jobs", g.jobs, "worker threads (0 = OpenMP default)");

  auto* trace_cmd = app.add_subcommand("trace", "trace the reference fan");
  std::optional<int> trace_source;
  trace_cmd->add_option("--source", trace_source, "also write the samples of this fan ray");

  auto* beam_cmd = app.add_subcommand("beam", "build one beam and its boundary trace");
  std::optional<int> beam_source;
  std::optional<double> beam_lambda;
  beam_cmd->add_option("--source", beam_source, "fan index (default: probe source on the normal at theta = pi)");
  beam_cmd->add_option("--lambda", beam_lambda, "frequency parameter");

  auto* synth_cmd = app.add_subcommand("synth", "synthesize a phaseless dataset");
  double synth_eps = 0.0, synth_noise = 0.0;
  std::optional<double> synth_lambda, synth_alpha;
  std::string synth_fan;
  synth_cmd->add_option("--eps", synth_eps, "perturbation amplitude (0 = reference medium)");
  synth_cmd->add_option("--lambda", synth_lambda, "frequency parameter");
  synth_cmd->add_option("--alpha", synth_alpha, "attenuation");
  synth_cmd->add_option("--fan", synth_fan, "fan size, e.g. 64x8");
  synth_cmd->add_option("--noise", synth_noise, "multiplicative noise level");

  auto* transform_cmd = app.add_subcommand("transform", "flow transform of the perturbation over the reference fan");
  std::optional<double> transform_eps;
  transform_cmd->add_option("--eps", transform_eps, "perturbation amplitude (default: largest sweep value)");

  auto* invert_cmd = app.add_subcommand("invert", "reconstruct from two datasets");
  std::string ref_dir, meas_dir;
  std::optional<int> invert_grid;
  std::optional<double> invert_reg, invert_eps;
  invert_cmd->add_option("--ref", ref_dir, "reference dataset directory")->required();
  invert_cmd->add_option("--meas", meas_dir, "measured dataset directory")->required();
  invert_cmd->add_option("--grid", invert_grid, "pixels per side");
  invert_cmd->add_option("--reg", invert_reg, "relative Tikhonov weight");
  invert_cmd->add_option("--eps", invert_eps, "perturbation amplitude of the ground truth, if known");

  auto* scan_cmd = app.add_subcommand("residual-scan", "Helmholtz residual of the beam field versus lambda");
  auto* stab_cmd = app.add_subcommand("stability", "stability sweep over lambda, eps and noise");
  auto* all_cmd = app.add_subcommand("run-all", "all pipelines and campaigns with a manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = load(g);
    const std::filesystem::path out = g.out;
    std::filesystem::create_directories(out);

    if (*trace_cmd) {
      const Medium medium = reference_medium(cfg);
      const auto fan = make_fan(cfg, medium);
      const auto rays = trace_fan(fan, medium, cfg.synthesis.trace);
      exit_table(fan, rays).write(out / "exit_times.csv");
      report("exit table", out / "exit_times.csv");
      if (trace_source) {
        if (*trace_source < 0 || *trace_source >= static_cast<int>(rays.size())) throw ConfigError("--source out of range");
        const auto path = out / ("ray_" + std::to_string(*trace_source) + ".csv");
        ray_table(rays[static_cast<std::size_t>(*trace_source)]).write(path);
        report("ray", path);
      }
    } else if (*beam_cmd) {
      const Medium medium = reference_medium(cfg);
      SourceDirection src = probe_source(cfg.domain);
      if (beam_source) {
        const auto fan = make_fan(cfg, medium);
        if (*beam_source < 0 || *beam_source >= static_cast<int>(fan.size())) throw ConfigError("--source out of range");
        src = fan[static_cast<std::size_t>(*beam_source)];
      }
      BeamConfig bc = cfg.synthesis.beam;
      if (beam_lambda) bc.lambda = *beam_lambda;
      const BeamField field(propagate_beam(trace(src, medium, cfg.synthesis.trace), bc, medium));
      beam_table(field.beam()).write(out / "beam.csv");
      boundary_table(boundary_trace(field, cfg.domain, cfg.synthesis.sampling)).write(out / "boundary.csv");
      report("beam", out / "beam.csv");
      report("boundary", out / "boundary.csv");
    } else if (*synth_cmd) {
      if (!synth_fan.empty()) parse_fan(synth_fan, cfg);
      if (synth_lambda) cfg.synthesis.beam.lambda = *synth_lambda;
      if (synth_alpha) cfg.synthesis.beam.alpha = *synth_alpha;
      cfg.synthesis.beam.validate();
      const Medium ref = reference_medium(cfg);
      const auto fan = make_fan(cfg, ref);
      const Medium medium = synth_eps == 0.0 ? ref : perturbed_medium(cfg, synth_eps);
      const Dataset d = add_noise(synthesize(medium, fan, cfg.synthesis), synth_noise, cfg.seed);
      write_dataset(d, out);
      report("dataset", out);
    } else if (*transform_cmd) {
      const PipelineGeometry geo = prepare_pipeline(cfg);
      const double eps = transform_eps.value_or(cfg.sweep.eps_list.back());
      const Sinogram s = flow_transform(perturbation_field(cfg, eps), geo.fan, geo.rays);
      sinogram_table(s.taus, s.values).write(out / "sinogram.csv");
      report("sinogram", out / "sinogram.csv");
    } else if (*invert_cmd) {
      if (invert_grid) cfg.grid_n = *invert_grid;
      if (invert_reg) cfg.inversion.reg = *invert_reg;
      const Dataset ref = read_dataset(ref_dir);
      const Dataset meas = read_dataset(meas_dir);
      const Medium medium = reference_medium(cfg);
      std::vector<SourceDirection> fan;
      for (const auto& r : ref.records) fan.push_back(r.source);
      const auto rays = trace_fan(fan, medium, ref.config.trace);
      const PixelGrid grid(cfg.domain, cfg.grid_n, cfg.grid_n);
      const RayMatrix a = ray_matrix(rays, grid);
      const ExtractionResult ex = extract_ray_integrals(ref, meas, ref.config.beam.alpha);
      std::vector<char> valid;
      for (const auto& dg : ex.diagnostics) valid.push_back(dg.valid ? 1 : 0);
      const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(ex.values.data(), static_cast<Eigen::Index>(ex.values.size()));
      const Reconstruction rec = solve_linear(a, b, grid, cfg.inversion, valid);
      write_grid_image(grid, rec.image, out / "recon.csv");
      nlohmann::ordered_json rj;
      rj["iterations"] = rec.iterations;
      rj["converged"] = rec.converged;
      rj["reg_parameter"] = rec.reg_parameter;
      rj["rows_used"] = rec.rows_used;
      rj["flagged"] = ex.flagged;
      rj["delta"] = sup_difference(ref, meas);
      rj["final_residual"] = rec.residual_history.back();
      if (invert_eps) rj["rel_l2_error"] = l2_error(grid, rec.image, grid.sample(perturbation_field(cfg, *invert_eps)));
      std::ofstream(out / "recon_report.json") << rj.dump(2) << '\n';
      report("reconstruction", out / "recon.csv");
      report("report", out / "recon_report.json");
    } else if (*scan_cmd) {
      const ResidualScanReport rep = run_residual_scan(cfg, reference_medium(cfg));
      rep.table().write(out / "residual_scan.csv");
      report("residual scan", out / "residual_scan.csv");
      std::printf("slope %.4f monotone %d\n", rep.slope, int(rep.monotone));
      if (!rep.monotone || !(rep.slope < 0.0)) return 1;
    } else if (*stab_cmd) {
      const StabilityReport rep = run_stability_sweep(cfg, g.jobs);
      rep.table().write(out / "stability.csv");
      report("stability", out / "stability.csv");
      for (const auto& r : rep.rows)
        if (!r.ok) return 1;
    } else if (*all_cmd) {
      const int status = run_all(cfg, out, g.jobs);
      report("manifest", out / "manifest.json");
      return status;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
