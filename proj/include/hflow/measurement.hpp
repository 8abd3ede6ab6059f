#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hflow/beam_field.hpp"
#include "hflow/fan.hpp"
#include "hflow/ray.hpp"

namespace hflow {

struct PhaselessRecord {
  SourceDirection source;
  std::vector<double> theta_b;
  std::vector<double> abs_u;
  double peak_theta = 0.0;
  double peak_value = 0.0;
  double tau = 0.0;
  bool degenerate = false;
};

struct SynthesisConfig {
  BeamConfig beam;
  TraceOptions trace;
  BoundarySampling sampling;
};

struct Dataset {
  SynthesisConfig config;
  std::uint64_t fingerprint = 0;  // hash of the medium description
  std::vector<PhaselessRecord> records;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(const std::string& text);

/// Single source: trace, propagate the beam and sample the boundary.
PhaselessRecord synthesize_record(const Medium& medium, const SourceDirection& source, const SynthesisConfig& cfg);

/// One record per fan source, in fan order. Sources whose ray or beam fails
/// are collected and reported together in a single TrappedRayError.
Dataset synthesize(const Medium& medium, const std::vector<SourceDirection>& fan, const SynthesisConfig& cfg);

/// max over sources and boundary nodes of ||u1| - |u2||.
double sup_difference(const Dataset& d1, const Dataset& d2);

/// absU -> max(0, absU (1 + level xi)), xi ~ U(-1, 1), one generator per
/// record seeded with seed + record index. Peaks are refitted afterwards.
Dataset add_noise(const Dataset& d, double level, std::uint64_t seed);

/// Directory with header.json and samples.csv.
void write_dataset(const Dataset& d, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

} // namespace hflow
