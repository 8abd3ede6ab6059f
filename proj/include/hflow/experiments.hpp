#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hflow/config.hpp"

namespace hflow {

/// Plain numeric table written as CSV with a header row and %.17g values.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void write(const std::filesystem::path& path) const;
  static CsvTable read(const std::filesystem::path& path);
};

/// s, x, y, px, py.
CsvTable ray_table(const RayPath& ray);
/// theta_index, dir_index, theta, angle, tau.
CsvTable exit_table(const std::vector<SourceDirection>& fan, const std::vector<RayPath>& rays);
/// s, x, y, ReM11, ImM11, ReM12, ImM12, ReM22, ImM22, abs_a0, S.
CsvTable beam_table(const BeamState& beam);
/// theta_b, absU.
CsvTable boundary_table(const BoundaryTrace& trace);
/// source_idx, tau, value.
CsvTable sinogram_table(const std::vector<double>& taus, const std::vector<double>& values);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Source used for single-beam experiments: boundary parameter pi, launched
/// along the inward normal.
SourceDirection probe_source(const Domain& domain);

struct ResidualScanReport {
  std::vector<ResidualResult> rows;
  double slope = 0.0;
  bool monotone = false;
  CsvTable table() const;
};

ResidualScanReport run_residual_scan(const ExperimentConfig& cfg, const Medium& medium);

struct StabilityRow {
  double lambda = 0.0;
  double eps = 0.0;
  double noise = 0.0;
  double delta = 0.0;
  double rel_error = 0.0;
  double slope = 0.0;  // log-log slope of rel_error over lambda for this (eps, noise)
  double runtime = 0.0;
  int iterations = 0;
  int flagged = 0;
  bool ok = false;
  std::string error;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  /// Deterministic columns only (runtime is reported separately).
  CsvTable table() const;
};

/// Everything one (lambda, eps, noise) reconstruction produces.
struct PipelineResult {
  Dataset reference;
  Dataset measured;
  ExtractionResult extraction;
  Reconstruction reconstruction;
  Eigen::VectorXd truth;
  double delta = 0.0;
  double rel_error = 0.0;
};

/// Shared, lambda-independent pieces of the phaseless pipeline.
struct PipelineGeometry {
  Medium reference;
  std::vector<SourceDirection> fan;
  std::vector<RayPath> rays;
  PixelGrid grid;
  RayMatrix matrix;
};

PipelineGeometry prepare_pipeline(const ExperimentConfig& cfg);

/// synthesize both media -> noise -> delta -> extract -> invert. `reference`
/// may be passed in to reuse a dataset synthesized at the same lambda.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const PipelineGeometry& geo, double lambda, double eps,
                            double noise, const Dataset* reference = nullptr, const Dataset* measured = nullptr);

StabilityReport run_stability_sweep(const ExperimentConfig& cfg, int jobs = 1);

/// Runs the unit pipelines and both campaigns into `out`, writing
/// manifest.json last. Returns the process exit status.
int run_all(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs = 1);

/// Hex FNV-1a of the canonical dump of the configuration document.
std::string config_hash(const ExperimentConfig& cfg);

inline constexpr const char* kVersion = "1.0.0";

} // namespace hflow
