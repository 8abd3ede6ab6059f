#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hflow/errors.hpp"
#include "hflow/experiments.hpp"

using namespace hflow;
namespace fs = std::filesystem;

namespace {

nlohmann::json default_doc() {
  std::ifstream in("configs/default.json");
  return nlohmann::json::parse(in);
}

std::string config_error(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(HFLOW_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("default configuration parses") {
  const ExperimentConfig cfg = load_config("configs/default.json");
  CHECK(cfg.fan.points == 64);
  CHECK(cfg.fan.directions == 8);
  CHECK(cfg.grid_n == 32);
  CHECK(cfg.synthesis.beam.lambda == 1e4);
  CHECK(cfg.synthesis.beam.alpha == 0.5);
  CHECK(cfg.perturbation.size() == 2);
  CHECK(cfg.sweep.lambda_list == std::vector<double>{1e2, 1e3, 1e4});
  CHECK(make_fan(cfg, reference_medium(cfg)).size() == 64 * 8);
}

TEST_CASE("missing required fields are named") {
  for (const auto& [section, key] : std::vector<std::pair<std::string, std::string>>{
           {"beam", "lambda"}, {"beam", "alpha"}, {"fan", "points"}, {"grid", "n"}, {"domain", "kind"}}) {
    nlohmann::json j = default_doc();
    j[section].erase(key);
    const std::string msg = config_error(j);
    CHECK(msg.find("missing required config field '" + section + "." + key + "'") != std::string::npos);
  }
  nlohmann::json j = default_doc();
  j.erase("seed");
  CHECK(config_error(j).find("'seed'") != std::string::npos);
}

TEST_CASE("invalid values are rejected") {
  nlohmann::json j = default_doc();
  j["sweep"]["lambda_list"] = {1e3, 1e2};
  CHECK_FALSE(config_error(j).empty());
  j = default_doc();
  j["sweep"]["noise_list"] = nlohmann::json::array();
  CHECK_FALSE(config_error(j).empty());
  j = default_doc();
  j["beam"]["alpha"] = 1.5;
  CHECK_FALSE(config_error(j).empty());
  j = default_doc();
  j["domain"]["kind"] = "torus";
  CHECK_FALSE(config_error(j).empty());
  j = default_doc();
  j["beam"]["riccati"] = "other";
  CHECK_FALSE(config_error(j).empty());
}

TEST_CASE("perturbation is tapered and scaled by epsilon") {
  const ExperimentConfig cfg = load_config("configs/default.json");
  const ScalarField f = perturbation_field(cfg, 1e-2);
  const Vec2 x(0.2, 0.1);
  double expected = 0.0;
  for (const GaussianBump& b : cfg.perturbation) {
    expected += 1e-2 * b.amplitude * std::exp(-(x - b.center).squaredNorm() / (2 * b.width * b.width));
  }
  CHECK(std::abs(f.value(x) - expected) < 1e-15);
  CHECK(f.value(Vec2(0.95, 0.0)) == 0.0);
  const Medium m = perturbed_medium(cfg, 1e-2);
  CHECK(std::abs(m.n2(x, 0).value - (1.0 + expected)) < 1e-15);
  CHECK(m.n2(Vec2(0.0, 0.97), 0).value == 1.0);
}

TEST_CASE("csv tables round trip exactly") {
  const fs::path dir = scratch("csv");
  CsvTable t{{"a", "b", "c"}, {{1.0 / 3.0, -2.5e-300, 1e300}, {std::nextafter(1.0, 2.0), 0.0, -0.1}}};
  t.write(dir / "t.csv");
  const CsvTable r = CsvTable::read(dir / "t.csv");
  CHECK(r.header == t.header);
  CHECK(r.rows == t.rows);
  fs::remove_all(dir);
}

TEST_CASE("loglog slope") {
  CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
  CHECK(loglog_slope({2, 4}, {3, 12}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), ContractViolation);
}

TEST_CASE("residual scan is converged in the finite-difference step") {
  ExperimentConfig cfg = load_config("configs/default.json");
  const Medium m = reference_medium(cfg);
  const ResidualScanReport coarse = run_residual_scan(cfg, m);
  cfg.residual_scan.options.step_factor *= 0.5;
  const ResidualScanReport fine = run_residual_scan(cfg, m);
  for (std::size_t k = 0; k < coarse.rows.size(); ++k) {
    CHECK(std::abs(fine.rows[k].residual_norm / coarse.rows[k].residual_norm - 1.0) < 0.05);
  }
  CHECK(coarse.slope < 0.0);
  CHECK(coarse.monotone);
}

TEST_CASE("residual slope hardly depends on the attenuation") {
  ExperimentConfig cfg = load_config("configs/default.json");
  const Medium m = reference_medium(cfg);
  const double with = run_residual_scan(cfg, m).slope;
  cfg.synthesis.beam.alpha = 0.0;
  const double without = run_residual_scan(cfg, m).slope;
  CHECK(std::abs(with - without) < 0.2);
}

TEST_CASE("residual scan needs two decades") {
  ExperimentConfig cfg = load_config("configs/default.json");
  cfg.residual_scan.lambda_list = {1e2, 3e2, 9e2};
  CHECK_THROWS_AS(run_residual_scan(cfg, reference_medium(cfg)), ConfigError);
}

TEST_CASE("cli exits with 2 on a configuration error") {
  const fs::path dir = scratch("cli_config");
  nlohmann::json j = default_doc();
  j["beam"].erase("lambda");
  std::ofstream(dir / "bad.json") << j.dump(2);
  CHECK(run_cli("trace --config " + (dir / "bad.json").string() + " --out " + (dir / "out").string(),
                dir / "log.txt") == 2);
  CHECK(slurp(dir / "log.txt").find("beam.lambda") != std::string::npos);
  CHECK(run_cli("trace --config " + (dir / "missing.json").string(), dir / "log2.txt") == 2);
  fs::remove_all(dir);
}

TEST_CASE("cli trace writes tables with headers") {
  const fs::path dir = scratch("cli_trace");
  REQUIRE(run_cli("trace --config configs/default.json --out " + dir.string(), dir / "log.txt") == 0);
  bool found = false;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    found = true;
    const CsvTable t = CsvTable::read(e.path());
    CHECK_FALSE(t.header.empty());
    for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
  }
  CHECK(found);
  fs::remove_all(dir);
}
