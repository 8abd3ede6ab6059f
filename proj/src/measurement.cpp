#include "hflow/measurement.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hflow/config.hpp"
#include "hflow/errors.hpp"
#include "hflow/parallel.hpp"

namespace hflow {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

PhaselessRecord synthesize_record(const Medium& medium, const SourceDirection& source, const SynthesisConfig& cfg) {
  RayPath ray = trace(source, medium, cfg.trace);
  const double tau = ray.tau;
  const BeamField field(propagate_beam(ray, cfg.beam, medium));
  BoundaryTrace bt = boundary_trace(field, medium.domain(), cfg.sampling);
  PhaselessRecord rec;
  rec.source = source;
  rec.theta_b = std::move(bt.theta);
  rec.abs_u = std::move(bt.abs_u);
  rec.peak_theta = bt.peak_theta;
  rec.peak_value = bt.peak_value;
  rec.degenerate = bt.degenerate;
  rec.tau = tau;
  return rec;
}

Dataset synthesize(const Medium& medium, const std::vector<SourceDirection>& fan, const SynthesisConfig& cfg) {
  cfg.beam.validate();
  Dataset d;
  d.config = cfg;
  d.fingerprint = fnv1a(medium_to_json(medium).dump());
  d.records.resize(fan.size());
  std::vector<std::string> failures(fan.size());
  parallel_for(static_cast<int>(fan.size()), [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      d.records[k] = synthesize_record(medium, fan[k], cfg);
    } catch (const Error& e) {
      failures[k] = e.what();
    }
  });
  std::ostringstream os;
  int failed = 0;
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (failures[k].empty()) continue;
    ++failed;
    os << "\n  source " << k << " (theta " << fan[k].theta_index << ", dir " << fan[k].dir_index
       << "): " << failures[k];
  }
  if (failed > 0) {
    throw TrappedRayError("synthesis failed for " + std::to_string(failed) + " source(s):" + os.str());
  }
  return d;
}

double sup_difference(const Dataset& d1, const Dataset& d2) {
  if (d1.records.size() != d2.records.size()) throw ContractViolation("sup_difference: fans differ in size");
  double delta = 0.0;
  for (std::size_t k = 0; k < d1.records.size(); ++k) {
    const auto& a = d1.records[k];
    const auto& b = d2.records[k];
    if (a.theta_b != b.theta_b || a.source.theta_index != b.source.theta_index ||
        a.source.dir_index != b.source.dir_index) {
      throw ContractViolation("sup_difference: records " + std::to_string(k) + " use different sampling");
    }
    for (std::size_t j = 0; j < a.abs_u.size(); ++j) delta = std::max(delta, std::abs(a.abs_u[j] - b.abs_u[j]));
  }
  return delta;
}

Dataset add_noise(const Dataset& d, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw ContractViolation("add_noise: level must be non-negative");
  Dataset out = d;
  if (level == 0.0) return out;
  for (std::size_t k = 0; k < out.records.size(); ++k) {
    PhaselessRecord& r = out.records[k];
    std::mt19937_64 rng(seed + k);
    std::uniform_real_distribution<double> xi(-1.0, 1.0);
    for (double& u : r.abs_u) {
      u = std::max(0.0, u * (1.0 + level * xi(rng)));
      if (u < 1e-300) u = 0.0;
    }
    BoundaryTrace bt;
    bt.theta = r.theta_b;
    bt.abs_u = r.abs_u;
    locate_peak(bt, d.config.sampling.floor);
    r.peak_theta = bt.peak_theta;
    r.peak_value = bt.peak_value;
    r.degenerate = bt.degenerate;
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace

void write_dataset(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json h;
  h["format"] = "hflow-dataset-1";
  h["fingerprint"] = hex(d.fingerprint);
  h["config"] = synthesis_config_to_json(d.config);
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : d.records) {
    recs.push_back({{"theta_index", r.source.theta_index},
                    {"dir_index", r.source.dir_index},
                    {"theta", r.source.theta},
                    {"angle", r.source.angle},
                    {"x0", {r.source.x0(0), r.source.x0(1)}},
                    {"omega0", {r.source.omega0(0), r.source.omega0(1)}},
                    {"peak_theta", r.peak_theta},
                    {"peak_value", r.peak_value},
                    {"tau", r.tau},
                    {"degenerate", r.degenerate}});
  }
  h["records"] = recs;
  std::ofstream(dir / "header.json") << h.dump(2) << "\n";

  std::ofstream csv(dir / "samples.csv");
  csv << "source_idx,theta_b,absU\n";
  for (std::size_t k = 0; k < d.records.size(); ++k) {
    const auto& r = d.records[k];
    for (std::size_t j = 0; j < r.abs_u.size(); ++j) csv << k << ',' << fmt(r.theta_b[j]) << ',' << fmt(r.abs_u[j]) << '\n';
  }
  if (!csv) throw Error("cannot write dataset to " + dir.string());
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream hin(dir / "header.json");
  if (!hin) throw ConfigError("missing dataset header " + (dir / "header.json").string());
  const nlohmann::json h = nlohmann::json::parse(hin);
  Dataset d;
  d.fingerprint = std::stoull(h.at("fingerprint").get<std::string>(), nullptr, 16);
  d.config = synthesis_config_from_json(h.at("config"));
  for (const auto& j : h.at("records")) {
    PhaselessRecord r;
    r.source.theta_index = j.at("theta_index");
    r.source.dir_index = j.at("dir_index");
    r.source.theta = j.at("theta");
    r.source.angle = j.at("angle");
    r.source.x0 = Vec2(j.at("x0")[0], j.at("x0")[1]);
    r.source.omega0 = Vec2(j.at("omega0")[0], j.at("omega0")[1]);
    r.peak_theta = j.at("peak_theta");
    r.peak_value = j.at("peak_value");
    r.tau = j.at("tau");
    r.degenerate = j.at("degenerate");
    d.records.push_back(r);
  }
  std::ifstream csv(dir / "samples.csv");
  if (!csv) throw ConfigError("missing dataset samples " + (dir / "samples.csv").string());
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    const auto k = std::stoul(a);
    if (k >= d.records.size()) throw ConfigError("dataset sample refers to unknown source " + a);
    d.records[k].theta_b.push_back(std::stod(b));
    d.records[k].abs_u.push_back(std::stod(c));
  }
  return d;
}

} // namespace hflow
