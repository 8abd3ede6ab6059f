#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hflow/helmholtz.hpp"
#include "hflow/inversion.hpp"
#include "hflow/measurement.hpp"

namespace hflow {

struct FanSpec {
  int points = 64;
  int directions = 8;
  double max_angle_deg = 60.0;
  double transversality = 0.05;
  bool energy_shell = true;  // |omega0| on the energy shell, otherwise unit length
};

struct SweepSpec {
  std::vector<double> lambda_list{1e2, 1e3, 1e4};
  std::vector<double> eps_list{1e-3, 1e-2};
  std::vector<double> noise_list{0.0, 1e-4, 1e-3};
};

struct ResidualScanSpec {
  std::vector<double> lambda_list{1e2, 1e3, 1e4};
  ResidualOptions options;
};

struct ExperimentConfig {
  Domain domain = Domain::disk(Vec2::Zero(), 1.0);
  Metric metric;
  ScalarField n2 = ScalarField::constant(1.0);
  std::vector<GaussianBump> perturbation;  // shape; amplitudes are multiplied by epsilon
  double blend_margin = 0.1;
  FanSpec fan;
  SynthesisConfig synthesis;
  int grid_n = 32;
  SolverOptions inversion;
  SweepSpec sweep;
  ResidualScanSpec residual_scan;
  std::uint64_t seed = 0;
  std::string output = "out";
  nlohmann::ordered_json source;  // the validated input document
};

/// Parses and validates a configuration document. Missing required fields
/// and invalid values raise ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json field_to_json(const ScalarField& f);
nlohmann::ordered_json medium_to_json(const Medium& m);
nlohmann::ordered_json synthesis_config_to_json(const SynthesisConfig& c);
SynthesisConfig synthesis_config_from_json(const nlohmann::json& j);

Medium reference_medium(const ExperimentConfig& cfg);
/// epsilon * perturbation shape, tapered to zero near the boundary.
ScalarField perturbation_field(const ExperimentConfig& cfg, double epsilon);
Medium perturbed_medium(const ExperimentConfig& cfg, double epsilon);
std::vector<SourceDirection> make_fan(const ExperimentConfig& cfg, const Medium& medium);

} // namespace hflow
