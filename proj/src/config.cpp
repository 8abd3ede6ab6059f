#include "hflow/config.hpp"

#include <fstream>

#include "hflow/errors.hpp"

namespace hflow {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const json* find(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

template <typename T>
T get_as(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + path + "' has the wrong type");
  }
}

template <typename T>
T required(const json& j, const std::string& path) {
  const json* v = find(j, path);
  if (!v) throw ConfigError("missing required config field '" + path + "'");
  return get_as<T>(*v, path);
}

template <typename T>
T optional(const json& j, const std::string& path, T fallback) {
  const json* v = find(j, path);
  return v ? get_as<T>(*v, path) : fallback;
}

Vec2 vec2(const json& j, const std::string& path, Vec2 fallback) {
  const json* v = find(j, path);
  if (!v) return fallback;
  const auto a = get_as<std::vector<double>>(*v, path);
  if (a.size() != 2) throw ConfigError("config field '" + path + "' must have two entries");
  return Vec2(a[0], a[1]);
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError("config field '" + path + "' must be positive");
}

std::vector<double> increasing_list(const json& j, const std::string& path, std::vector<double> fallback,
                                    bool must_exist) {
  const json* v = find(j, path);
  if (!v && must_exist) throw ConfigError("missing required config field '" + path + "'");
  std::vector<double> out = v ? get_as<std::vector<double>>(*v, path) : std::move(fallback);
  if (out.empty()) throw ConfigError("config field '" + path + "' must be a non-empty list");
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (!(out[k] > out[k - 1])) throw ConfigError("config field '" + path + "' must be strictly increasing");
  }
  return out;
}

Domain domain_from_json(const json& j) {
  const auto kind = required<std::string>(j, "domain.kind");
  const Vec2 c = vec2(j, "domain.center", Vec2::Zero());
  if (kind == "disk") {
    const double r = required<double>(j, "domain.radius");
    positive(r, "domain.radius");
    return Domain::disk(c, r);
  }
  if (kind == "ellipse") {
    if (!find(j, "domain.axes")) throw ConfigError("missing required config field 'domain.axes'");
    const Vec2 axes = vec2(j, "domain.axes", Vec2::Ones());
    positive(axes.minCoeff(), "domain.axes");
    return Domain::ellipse(c, axes);
  }
  if (kind == "smoothed_polygon") {
    const double apothem = required<double>(j, "domain.radius");
    const int sides = required<int>(j, "domain.sides");
    const double sharpness = optional<double>(j, "domain.sharpness", 20.0);
    positive(apothem, "domain.radius");
    if (sides < 3) throw ConfigError("config field 'domain.sides' must be at least 3");
    positive(sharpness, "domain.sharpness");
    return Domain::smoothed_polygon(c, apothem, sides, sharpness);
  }
  throw ConfigError("config field 'domain.kind' must be disk, ellipse or smoothed_polygon");
}

std::vector<GaussianBump> bumps_from_json(const json& j, const std::string& path) {
  std::vector<GaussianBump> out;
  const json* v = find(j, path);
  if (!v) return out;
  if (!v->is_array()) throw ConfigError("config field '" + path + "' must be a list");
  for (std::size_t k = 0; k < v->size(); ++k) {
    const json& b = (*v)[k];
    const std::string p = path + "[" + std::to_string(k) + "]";
    GaussianBump g;
    if (!b.contains("center")) throw ConfigError("missing required config field '" + p + ".center'");
    if (!b.contains("width")) throw ConfigError("missing required config field '" + p + ".width'");
    g.center = vec2(b, "center", Vec2::Zero());
    g.width = get_as<double>(b["width"], p + ".width");
    positive(g.width, p + ".width");
    g.amplitude = b.contains("amp") ? get_as<double>(b["amp"], p + ".amp") : 1.0;
    out.push_back(g);
  }
  return out;
}

ScalarField field_from_json(const json& j, const std::string& path, const Domain& domain, double margin) {
  const auto kind = required<std::string>(j, path + ".kind");
  if (kind == "constant") return ScalarField::constant(required<double>(j, path + ".value"));
  if (kind == "bumps") {
    const double base = required<double>(j, path + ".base");
    return ScalarField::bumps(base, bumps_from_json(j, path + ".bumps"), BoundaryBlend{domain, margin});
  }
  throw ConfigError("config field '" + path + ".kind' must be constant or bumps");
}

RiccatiForm riccati_from_string(const std::string& s, const std::string& path) {
  if (s == "hamiltonian") return RiccatiForm::hamiltonian;
  if (s == "homogenized") return RiccatiForm::homogenized;
  throw ConfigError("config field '" + path + "' must be hamiltonian or homogenized");
}

std::string riccati_name(RiccatiForm f) { return f == RiccatiForm::hamiltonian ? "hamiltonian" : "homogenized"; }

ordered_json vec_json(const Vec2& v) { return ordered_json::array({v(0), v(1)}); }

ordered_json domain_to_json(const Domain& d) {
  ordered_json j;
  switch (d.kind()) {
    case DomainKind::disk:
      j["kind"] = "disk";
      j["center"] = vec_json(d.center());
      j["radius"] = d.radius();
      break;
    case DomainKind::ellipse:
      j["kind"] = "ellipse";
      j["center"] = vec_json(d.center());
      j["axes"] = vec_json(d.semi_axes());
      break;
    case DomainKind::smoothed_polygon:
      j["kind"] = "smoothed_polygon";
      j["center"] = vec_json(d.center());
      j["radius"] = d.radius();
      j["sides"] = d.sides();
      j["sharpness"] = d.sharpness();
      break;
  }
  return j;
}

} // namespace

ordered_json field_to_json(const ScalarField& f) {
  ordered_json j;
  switch (f.kind()) {
    case FieldKind::constant:
      j["kind"] = "constant";
      j["value"] = f.base();
      break;
    case FieldKind::gaussian_bump_sum: {
      j["kind"] = "bumps";
      j["base"] = f.base();
      ordered_json list = ordered_json::array();
      for (const auto& b : f.bump_list()) {
        list.push_back({{"center", vec_json(b.center)}, {"width", b.width}, {"amp", b.amplitude}});
      }
      j["bumps"] = list;
      if (f.blend()) {
        j["blend_margin"] = f.blend()->margin;
        j["blend_domain"] = domain_to_json(f.blend()->domain);
      }
      break;
    }
    case FieldKind::gridded: {
      const GridSpline& s = f.spline();
      j["kind"] = "gridded";
      j["origin"] = vec_json(s.origin());
      j["spacing"] = s.spacing();
      j["nx"] = s.nx();
      j["ny"] = s.ny();
      j["values"] = s.values();
      break;
    }
  }
  return j;
}

ordered_json medium_to_json(const Medium& m) {
  ordered_json j;
  j["domain"] = domain_to_json(m.domain());
  j["n2"] = field_to_json(m.n2_field());
  if (m.metric().kind == MetricKind::euclidean) {
    j["metric"] = {{"kind", "euclidean"}};
  } else {
    j["metric"] = {{"kind", "conformal"}, {"factor", field_to_json(m.metric().factor)}};
  }
  j["extension"] = m.extension();
  return j;
}

ordered_json synthesis_config_to_json(const SynthesisConfig& c) {
  ordered_json j;
  j["beam"] = {{"lambda", c.beam.lambda},
               {"alpha", c.beam.alpha},
               {"tube_exponent", c.beam.tube_exponent},
               {"riccati", riccati_name(c.beam.riccati)},
               {"initial_amplitude", {c.beam.initial_amplitude.real(), c.beam.initial_amplitude.imag()}}};
  if (c.beam.initial_hessian) {
    const CMat2& m = *c.beam.initial_hessian;
    j["beam"]["initial_hessian"] = {{"re", {m(0, 0).real(), m(0, 1).real(), m(1, 0).real(), m(1, 1).real()}},
                                    {"im", {m(0, 0).imag(), m(0, 1).imag(), m(1, 0).imag(), m(1, 1).imag()}}};
  }
  j["trace"] = {{"step", c.trace.step},
                {"exit_tol", c.trace.exit_tol},
                {"max_parameter_factor", c.trace.max_parameter_factor},
                {"drift_tolerance", c.trace.drift_tolerance}};
  j["boundary"] = {{"nodes", c.sampling.nodes}, {"floor", c.sampling.floor}, {"window", c.sampling.window}};
  return j;
}

SynthesisConfig synthesis_config_from_json(const json& j) {
  SynthesisConfig c;
  c.beam.lambda = required<double>(j, "beam.lambda");
  c.beam.alpha = required<double>(j, "beam.alpha");
  c.beam.tube_exponent = optional<double>(j, "beam.tube_exponent", c.beam.tube_exponent);
  c.beam.riccati = riccati_from_string(optional<std::string>(j, "beam.riccati", "hamiltonian"), "beam.riccati");
  if (const json* a = find(j, "beam.initial_amplitude")) {
    const auto v = get_as<std::vector<double>>(*a, "beam.initial_amplitude");
    if (v.size() != 2) throw ConfigError("config field 'beam.initial_amplitude' must be [re, im]");
    c.beam.initial_amplitude = {v[0], v[1]};
  }
  if (const json* h = find(j, "beam.initial_hessian")) {
    const auto re = get_as<std::vector<double>>(h->at("re"), "beam.initial_hessian.re");
    const auto im = get_as<std::vector<double>>(h->at("im"), "beam.initial_hessian.im");
    if (re.size() != 4 || im.size() != 4) throw ConfigError("config field 'beam.initial_hessian' must be 2x2");
    CMat2 m;
    m << std::complex<double>(re[0], im[0]), std::complex<double>(re[1], im[1]), std::complex<double>(re[2], im[2]),
        std::complex<double>(re[3], im[3]);
    c.beam.initial_hessian = m;
  }
  c.trace.step = optional<double>(j, "trace.step", c.trace.step);
  c.trace.exit_tol = optional<double>(j, "trace.exit_tol", c.trace.exit_tol);
  c.trace.max_parameter_factor = optional<double>(j, "trace.max_parameter_factor", c.trace.max_parameter_factor);
  c.trace.drift_tolerance = optional<double>(j, "trace.drift_tolerance", c.trace.drift_tolerance);
  c.sampling.nodes = optional<int>(j, "boundary.nodes", c.sampling.nodes);
  c.sampling.floor = optional<double>(j, "boundary.floor", c.sampling.floor);
  c.sampling.window = optional<double>(j, "boundary.window", c.sampling.window);
  positive(c.trace.step, "trace.step");
  positive(c.trace.exit_tol, "trace.exit_tol");
  if (c.sampling.nodes < 3) throw ConfigError("config field 'boundary.nodes' must be at least 3");
  try {
    c.beam.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid beam settings: ") + e.what());
  }
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig cfg;
  cfg.domain = domain_from_json(j);
  cfg.blend_margin = optional<double>(j, "n2.blend_margin", 0.1 * cfg.domain.radius());
  positive(cfg.blend_margin, "n2.blend_margin");
  cfg.n2 = field_from_json(j, "n2", cfg.domain, cfg.blend_margin);

  const auto metric_kind = optional<std::string>(j, "metric.kind", "euclidean");
  if (metric_kind == "euclidean") {
    cfg.metric = Metric::euclidean();
  } else if (metric_kind == "conformal") {
    cfg.metric = Metric::conformal(field_from_json(j, "metric.factor", cfg.domain, cfg.blend_margin));
  } else {
    throw ConfigError("config field 'metric.kind' must be euclidean or conformal");
  }

  cfg.perturbation = bumps_from_json(j, "perturbation.bumps");
  if (find(j, "perturbation") && cfg.perturbation.empty()) {
    throw ConfigError("missing required config field 'perturbation.bumps'");
  }

  cfg.fan.points = required<int>(j, "fan.points");
  cfg.fan.directions = required<int>(j, "fan.directions");
  cfg.fan.max_angle_deg = optional<double>(j, "fan.max_angle_deg", cfg.fan.max_angle_deg);
  cfg.fan.transversality = optional<double>(j, "fan.transversality", cfg.fan.transversality);
  const auto speed = optional<std::string>(j, "fan.speed", "energy_shell");
  if (speed != "energy_shell" && speed != "unit") throw ConfigError("config field 'fan.speed' must be energy_shell or unit");
  cfg.fan.energy_shell = speed == "energy_shell";
  if (cfg.fan.points < 1) throw ConfigError("config field 'fan.points' must be positive");
  if (cfg.fan.directions < 1) throw ConfigError("config field 'fan.directions' must be positive");
  if (!(cfg.fan.max_angle_deg >= 0.0 && cfg.fan.max_angle_deg < 90.0)) {
    throw ConfigError("config field 'fan.max_angle_deg' must lie in [0, 90)");
  }

  cfg.synthesis = synthesis_config_from_json(j);

  cfg.grid_n = required<int>(j, "grid.n");
  if (cfg.grid_n < 2) throw ConfigError("config field 'grid.n' must be at least 2");

  cfg.inversion.reg = optional<double>(j, "inversion.reg", cfg.inversion.reg);
  cfg.inversion.max_iter = optional<int>(j, "inversion.max_iter", cfg.inversion.max_iter);
  cfg.inversion.tol = optional<double>(j, "inversion.tol", cfg.inversion.tol);
  if (!(cfg.inversion.reg >= 0.0)) throw ConfigError("config field 'inversion.reg' must be non-negative");
  if (cfg.inversion.max_iter < 1) throw ConfigError("config field 'inversion.max_iter' must be positive");

  cfg.sweep.lambda_list = increasing_list(j, "sweep.lambda_list", {}, true);
  cfg.sweep.eps_list = increasing_list(j, "sweep.eps_list", {}, true);
  cfg.sweep.noise_list = increasing_list(j, "sweep.noise_list", {}, true);
  for (double l : cfg.sweep.lambda_list)
    if (!(l >= 10.0)) throw ConfigError("config field 'sweep.lambda_list' entries must be at least 10");
  for (double n : cfg.sweep.noise_list)
    if (!(n >= 0.0)) throw ConfigError("config field 'sweep.noise_list' entries must be non-negative");

  cfg.residual_scan.lambda_list =
      increasing_list(j, "residual_scan.lambda_list", cfg.residual_scan.lambda_list, false);
  auto& ro = cfg.residual_scan.options;
  ro.stations = optional<int>(j, "residual_scan.stations", ro.stations);
  ro.transverse = optional<int>(j, "residual_scan.transverse", ro.transverse);
  ro.tube_factor = optional<double>(j, "residual_scan.tube_factor", ro.tube_factor);
  ro.end_margin = optional<double>(j, "residual_scan.end_margin", ro.end_margin);
  ro.step_factor = optional<double>(j, "residual_scan.step_factor", ro.step_factor);
  if (ro.stations < 1 || ro.transverse < 1) throw ConfigError("config field 'residual_scan' needs positive sample counts");

  cfg.seed = required<std::uint64_t>(j, "seed");
  cfg.output = optional<std::string>(j, "output", cfg.output);
  cfg.source = j;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

Medium reference_medium(const ExperimentConfig& cfg) { return Medium(cfg.domain, cfg.n2, cfg.metric); }

ScalarField perturbation_field(const ExperimentConfig& cfg, double epsilon) {
  std::vector<GaussianBump> b = cfg.perturbation;
  for (auto& g : b) g.amplitude *= epsilon;
  return ScalarField::bumps(0.0, std::move(b), BoundaryBlend{cfg.domain, cfg.blend_margin});
}

Medium perturbed_medium(const ExperimentConfig& cfg, double epsilon) {
  ScalarField base = cfg.n2;
  if (base.kind() == FieldKind::constant) {
    base = ScalarField::bumps(base.base(), {}, BoundaryBlend{cfg.domain, cfg.blend_margin});
  }
  return Medium(cfg.domain, ScalarField::sum(base, perturbation_field(cfg, epsilon)), cfg.metric);
}

std::vector<SourceDirection> make_fan(const ExperimentConfig& cfg, const Medium& medium) {
  FanOptions opt;
  opt.max_angle = cfg.fan.max_angle_deg * kPi / 180.0;
  opt.transversality = cfg.fan.transversality;
  opt.speed = cfg.fan.energy_shell ? energy_shell_speed(medium) : SpeedRule(unit_speed);
  return sample_inward_sphere(cfg.domain, cfg.fan.points, cfg.fan.directions, opt);
}

} // namespace hflow
