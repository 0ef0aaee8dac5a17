#include "forster/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "forster/errors.hpp"
#include "forster/units.hpp"

namespace forster {

namespace {

using json = nlohmann::ordered_json;

enum class Type { Number, OptNumber, Integer, Bool, String, Numbers };

struct Key {
  const char* name;
  Type type;
  json value;
  const char* note;
};

// Defaults. Notes end in the origin of the value: (experiment) for measured setup
// parameters, (calibration) for fitted coupling or loss constants, (numerics) otherwise.
const std::vector<Key>& registry() {
  static const std::vector<Key> keys = {
      {"scan", Type::String, "gain-scan", "starkmap | gain-scan | fidelity-scan | retrieval | oracle-check"},
      {"pair_system", Type::String, "rb87_50s48s", "preset name (rb87_50s48s, rb87_66s64s) or channel file path"},
      {"seed", Type::Integer, 1, "master seed of all random streams"},
      {"threads", Type::Integer, 0, "worker threads, 0 = hardware concurrency; results do not depend on it"},
      {"output_dir", Type::String, "out", "directory for CSV and JSON results"},

      {"field_grid", Type::Numbers, json::array(), "explicit field values in V/cm; empty = field_min..field_max"},
      {"field_min", Type::OptNumber, nullptr, "V/cm; null = lower end of the preset field window (0 for starkmap)"},
      {"field_max", Type::OptNumber, nullptr, "V/cm; null = upper end of the preset field window"},
      {"field_points", Type::Integer, 100, "points of the default field grid"},
      {"field_resolution", Type::Number, 0.002, "V/cm, half width of the field resolution boxcar (experiment)"},

      {"beam_waist_um", Type::Number, 6.2, "1/e^2 intensity waist of gate and source beams (experiment)"},
      {"cloud_half_length_um", Type::Number, 40.0, "1/e axial half length of the cloud (experiment)"},
      {"cloud_radius_um", Type::Number, 10.0, "1/e radius of the cloud (experiment)"},
      {"atom_number", Type::Number, 2.0e4, "atoms in the cloud (experiment)"},
      {"wavelength_um", Type::Number, 0.78024, "probe wavelength, sets the resonant cross section (experiment)"},
      {"gate_distribution", Type::String, "density_times_beam", "density_times_beam | pinned"},
      {"pinned_gate_um", Type::Numbers, json::array({0.0, 0.0, 0.0}), "gate position used with pinned (x, y, z)"},

      {"omega_rabi_mhz", Type::Number, 5.0, "control Rabi frequency Omega / 2pi (experiment)"},
      {"gamma_mhz", Type::Number, 3.03, "half the |e> decay rate / 2pi (experiment)"},
      {"gamma_s_mhz", Type::Number, 0.05, "|S(s)> decoherence / 2pi (calibration)"},
      {"source_detuning_mhz", Type::Number, 0.0, "source detuning omega / 2pi"},
      {"optical_depth", Type::OptNumber, nullptr, "on-axis optical depth; null = from atom number and geometry"},
      {"density_shape", Type::String, "gaussian", "gaussian | uniform axial density"},
      {"r_min_um", Type::Number, 0.5, "gate distance regularization (numerics)"},
      {"susceptibility_form", Type::String, "adiabatic", "adiabatic | full"},

      {"c3_prime_mhz", Type::OptNumber, nullptr, "exchange coupling C3' / 2pi in MHz um^3; null = preset"},
      {"gamma_p_mhz", Type::OptNumber, nullptr, "|P(s)> decoherence / 2pi; null = preset"},
      {"c6_reference_mhz", Type::OptNumber, nullptr, "zero-field C6 / 2pi in MHz um^6; null = preset"},

      {"gate_mean_in", Type::Number, 1.0, "mean incident gate photons (experiment)"},
      {"source_rate", Type::Number, 35.0, "incident source photons per us (experiment)"},
      {"pulse_length", Type::Number, 20.0, "source pulse length in us (experiment)"},
      {"storage_efficiency", Type::Number, 0.6, "gate storage efficiency (experiment)"},
      {"detector_efficiency", Type::Number, 0.3, "source detection efficiency (experiment)"},
      {"dephasing_per_photon", Type::Number, 0.012, "stationary excitations per scattered source photon (calibration)"},
      {"rate_ceiling", Type::Number, 1000.0, "reported rate limit when nothing bounds the rate, per us"},

      {"samples", Type::Integer, 2000, "Monte Carlo samples per field point"},
      {"max_samples", Type::Integer, 2000, "sample budget when target_std_error > 0"},
      {"target_std_error", Type::Number, 0.0, "standard error goal on T1; 0 = fixed sample count"},

      {"rate_grid", Type::Numbers, json::array({0.25, 0.5, 0.75, 1.0}), "source rates of the fidelity scan, per us"},
      {"fidelity_field_points", Type::Integer, 41, "points of the default fidelity field grid"},
      {"fidelity_gate_samples", Type::Integer, 48, "gate positions of the count mixture"},
      {"fidelity_beam_samples", Type::Integer, 96, "source positions per gate position"},
      {"fidelity_resolution_nodes", Type::Integer, 8, "field resolution nodes of the fidelity scan"},
      {"histogram_shots", Type::Integer, 200000, "shots of the exported count histograms"},

      {"source_means", Type::Numbers, json::array({0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0, 16.0}),
       "mean incident source photons of the retrieval curves"},
      {"retrieval_field", Type::OptNumber, nullptr, "V/cm of the on-resonance curve; null = first resonance"},
      {"retrieval_base_efficiency", Type::Number, 0.25, "storage and read-out efficiency eta_0 (experiment)"},
      {"storage_time", Type::Number, 4.2, "us between storage and read-out (experiment)"},
      {"spinwave_lifetime", Type::Number, 3.6, "us, coherence lifetime of the stored spin-wave (experiment)"},
      {"retrieval_pulse_length", Type::Number, 3.2, "us, source pulse during storage (experiment)"},
      {"spinwave_grid_points", Type::Integer, 201, "axial grid of the spin-wave (numerics)"},
      {"spinwave_grid_extent", Type::Number, 2.0, "grid spans +-extent * cloud half length (numerics)"},
      {"transverse_average", Type::Bool, true, "average retrieval over transverse gate and source positions"},
      {"retrieval_gate_samples", Type::Integer, 64, "gate transverse samples of the retrieval average"},
      {"retrieval_beam_samples", Type::Integer, 256, "source transverse samples of the retrieval average"},
      {"retrieval_resolution_nodes", Type::Integer, 4, "field resolution nodes of the on-resonance curve"},
      {"interaction_max_distance_um", Type::Number, 24.0, "transverse distances beyond this do not interact"},
      {"distance_nodes", Type::Integer, 25, "interpolation nodes in transverse distance (numerics)"},

      {"oracle_sets", Type::Integer, 10, "randomized parameter sets of the oracle check"},
      {"oracle_dz_um", Type::Number, 0.05, "cell size of the time-domain integration (numerics)"},
      {"oracle_light_speed", Type::Number, 20.0, "um/us, reduced light speed of the time-domain integration"},
      {"oracle_max_time", Type::Number, 400.0, "us, integration limit of the time-domain run"},
  };
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : registry())
    if (name == k.name) return &k;
  return nullptr;
}

std::string mark(const std::string& origin, const YAML::Mark& m) {
  if (m.line < 0) return origin;
  return fmt::format("{}:{}:{}", origin, m.line + 1, m.column + 1);
}

double to_double(const YAML::Node& n, const std::string& where) {
  double v = 0.0;
  try {
    v = n.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: expected a number", where));
  }
  if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: value must be finite", where));
  return v;
}

json convert(const Key& key, const YAML::Node& n, const std::string& where) {
  switch (key.type) {
    case Type::Number:
      if (!n.IsScalar()) throw ConfigError(fmt::format("{}: expected a number", where));
      return to_double(n, where);
    case Type::OptNumber:
      if (n.IsNull()) return nullptr;
      if (!n.IsScalar()) throw ConfigError(fmt::format("{}: expected a number or null", where));
      return to_double(n, where);
    case Type::Integer:
      try {
        if (!n.IsScalar() || n.Scalar().starts_with("-")) throw YAML::Exception(n.Mark(), "");
        return n.as<std::uint64_t>();
      } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: expected a non-negative integer", where));
      }
    case Type::Bool:
      try {
        return n.as<bool>();
      } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: expected true or false", where));
      }
    case Type::String:
      if (!n.IsScalar()) throw ConfigError(fmt::format("{}: expected a string", where));
      return n.Scalar();
    case Type::Numbers: {
      if (!n.IsSequence()) throw ConfigError(fmt::format("{}: expected a list of numbers", where));
      json out = json::array();
      for (const auto& e : n) out.push_back(to_double(e, where));
      return out;
    }
  }
  return nullptr;
}

std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  return out;
}

double opt(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("invalid configuration: " + message);
}

void resolve(RunConfig& c) {
  const json& v = c.values;
  c.scan = parse_scan(v["scan"].get<std::string>());
  c.preset = load_pair_preset(v["pair_system"].get<std::string>());
  c.seed = v["seed"].get<std::uint64_t>();
  c.threads = static_cast<int>(v["threads"].get<std::uint64_t>());
  c.output_dir = v["output_dir"].get<std::string>();
  require(!c.output_dir.empty(), "output_dir must not be empty");

  auto& g = c.model.geometry;
  g.beam_waist = v["beam_waist_um"].get<double>();
  g.cloud_half_length = v["cloud_half_length_um"].get<double>();
  g.cloud_radius = v["cloud_radius_um"].get<double>();
  g.atom_number = v["atom_number"].get<double>();
  g.wavelength = v["wavelength_um"].get<double>();
  const auto dist = v["gate_distribution"].get<std::string>();
  require(dist == "density_times_beam" || dist == "pinned", "gate_distribution must be density_times_beam or pinned");
  g.gate_distribution = dist == "pinned" ? GateDistribution::Pinned : GateDistribution::DensityTimesBeam;
  const auto pin = numbers(v["pinned_gate_um"]);
  require(pin.size() == 3, "pinned_gate_um needs three coordinates");
  g.pinned_gate = {pin[0], pin[1], pin[2]};

  auto& p = c.model.propagation;
  p.omega_rabi = angular(v["omega_rabi_mhz"].get<double>());
  p.gamma = angular(v["gamma_mhz"].get<double>());
  p.gamma_s = angular(v["gamma_s_mhz"].get<double>());
  p.omega = angular(v["source_detuning_mhz"].get<double>());
  p.r_min = v["r_min_um"].get<double>();
  const auto shape = v["density_shape"].get<std::string>();
  require(shape == "gaussian" || shape == "uniform", "density_shape must be gaussian or uniform");
  const auto form = v["susceptibility_form"].get<std::string>();
  require(form == "adiabatic" || form == "full", "susceptibility_form must be adiabatic or full");
  p.form = form == "full" ? SusceptibilityForm::Full : SusceptibilityForm::Adiabatic;

  auto& in = c.model.interaction;
  in = c.preset.interaction();
  in.c3_prime = angular(opt(v["c3_prime_mhz"], ordinary(in.c3_prime)));
  in.gamma_p = angular(opt(v["gamma_p_mhz"], ordinary(in.gamma_p)));
  in.c6_reference = angular(opt(v["c6_reference_mhz"], ordinary(in.c6_reference)));
  c.model.field_resolution = v["field_resolution"].get<double>();

  auto& s = c.stats;
  s.gate_mean_in = v["gate_mean_in"].get<double>();
  s.source_rate = v["source_rate"].get<double>();
  s.pulse_length = v["pulse_length"].get<double>();
  s.storage_efficiency = v["storage_efficiency"].get<double>();
  s.detector_efficiency = v["detector_efficiency"].get<double>();
  s.dephasing_per_photon = v["dephasing_per_photon"].get<double>();
  s.rate_ceiling = v["rate_ceiling"].get<double>();

  c.sampling.min_samples = v["samples"].get<std::size_t>();
  c.sampling.max_samples = std::max(c.sampling.min_samples, v["max_samples"].get<std::size_t>());
  c.sampling.target_std_error = v["target_std_error"].get<double>();
  c.sampling.seed = c.seed;
  c.sampling.threads = c.threads;
  require(c.sampling.target_std_error >= 0.0, "target_std_error must be >= 0");

  const double fmin = opt(v["field_min"], c.scan == ScanKind::StarkMap ? 0.0 : c.preset.field_window[0]);
  const double fmax = opt(v["field_max"], c.preset.field_window[1]);
  require(fmin >= 0.0 && fmax > fmin, "field range needs 0 <= field_min < field_max");
  c.field_grid = numbers(v["field_grid"]);
  if (c.field_grid.empty()) {
    const auto points = c.scan == ScanKind::FidelityScan ? v["fidelity_field_points"] : v["field_points"];
    require(points.get<std::size_t>() >= 1, "field point count must be >= 1");
    c.field_grid = linspace(fmin, fmax, points.get<std::size_t>());
  }
  require(std::is_sorted(c.field_grid.begin(), c.field_grid.end()), "field_grid must be sorted ascending");
  require(c.field_grid.front() >= 0.0, "fields must be >= 0");

  c.rate_grid = numbers(v["rate_grid"]);
  for (double r : c.rate_grid) require(r > 0.0, "rate_grid entries must be > 0");
  c.fidelity.gate_samples = v["fidelity_gate_samples"].get<std::size_t>();
  c.fidelity.beam_samples = v["fidelity_beam_samples"].get<std::size_t>();
  c.fidelity.resolution_nodes = v["fidelity_resolution_nodes"].get<std::size_t>();
  c.fidelity.seed = c.seed;
  c.fidelity.threads = c.threads;
  require(c.fidelity.gate_samples >= 1 && c.fidelity.beam_samples >= 1 && c.fidelity.resolution_nodes >= 1,
          "fidelity sample and node counts must be >= 1");
  c.histogram_shots = v["histogram_shots"].get<std::size_t>();

  c.source_means = numbers(v["source_means"]);
  for (double n : c.source_means) require(n >= 0.0, "source_means entries must be >= 0");
  auto& r = c.retrieval;
  r.base_efficiency = v["retrieval_base_efficiency"].get<double>();
  r.storage_time = v["storage_time"].get<double>();
  r.lifetime = v["spinwave_lifetime"].get<double>();
  r.pulse_length = v["retrieval_pulse_length"].get<double>();
  r.grid_points = v["spinwave_grid_points"].get<std::size_t>();
  r.grid_extent = v["spinwave_grid_extent"].get<double>();
  r.transverse_average = v["transverse_average"].get<bool>();
  r.gate_samples = v["retrieval_gate_samples"].get<std::size_t>();
  r.beam_samples = v["retrieval_beam_samples"].get<std::size_t>();
  r.max_distance = v["interaction_max_distance_um"].get<double>();
  r.distance_nodes = v["distance_nodes"].get<std::size_t>();
  r.seed = c.seed;
  r.threads = c.threads;
  c.retrieval_resolution_nodes = v["retrieval_resolution_nodes"].get<std::size_t>();
  require(c.retrieval_resolution_nodes >= 1, "retrieval_resolution_nodes must be >= 1");

  c.oracle_sets = v["oracle_sets"].get<std::size_t>();
  c.oracle.dz = v["oracle_dz_um"].get<double>();
  c.oracle.light_speed = v["oracle_light_speed"].get<double>();
  c.oracle.max_time = v["oracle_max_time"].get<double>();
  require(c.oracle.dz > 0.0 && c.oracle.light_speed > 0.0 && c.oracle.max_time > 0.0,
          "oracle step, light speed and time limit must be > 0");

  try {
    g.validate();
    p.density = shape == "uniform" ? DensityProfile::uniform(g.cloud_half_length, g.cloud_radius) : g.density();
    const auto od = v["optical_depth"];
    if (od.is_null()) {
      p.g = g.coupling(p.gamma);
    } else {
      // The geometry coupling refers to the axial profile alone.
      p.g = coupling_for_optical_depth(od.get<double>(), p.gamma, p.density, p.c);
    }
    c.model.validate();
    c.stats.validate();
    r.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("invalid configuration: {}", e.what()));
  }

  if (v["retrieval_field"].is_null()) {
    const auto roots = resonance_fields(c.preset.pair, c.preset.field_window[1]);
    c.retrieval_field = roots.empty() ? c.preset.field_window[0] : roots.front().field;
  } else {
    c.retrieval_field = v["retrieval_field"].get<double>();
    require(c.retrieval_field >= 0.0, "retrieval_field must be >= 0");
  }
}

std::string format_value(const json& j) {
  if (j.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < j.size(); ++i) out += (i ? ", " : "") + j[i].dump();
    return out + "]";
  }
  return j.is_null() ? "null" : j.dump();
}

}  // namespace

ScanKind parse_scan(const std::string& name) {
  if (name == "starkmap") return ScanKind::StarkMap;
  if (name == "gain-scan") return ScanKind::GainScan;
  if (name == "fidelity-scan") return ScanKind::FidelityScan;
  if (name == "retrieval") return ScanKind::Retrieval;
  if (name == "oracle-check") return ScanKind::OracleCheck;
  throw ConfigError(
      fmt::format("unknown scan '{}' (starkmap, gain-scan, fidelity-scan, retrieval, oracle-check)", name));
}

std::string scan_name(ScanKind scan) {
  switch (scan) {
    case ScanKind::StarkMap: return "starkmap";
    case ScanKind::GainScan: return "gain-scan";
    case ScanKind::FidelityScan: return "fidelity-scan";
    case ScanKind::Retrieval: return "retrieval";
    case ScanKind::OracleCheck: return "oracle-check";
  }
  return "";
}

RunConfig config_from_yaml(const std::string& text, const std::string& origin,
                           const std::vector<std::string>& overrides) {
  RunConfig c;
  for (const auto& k : registry()) c.values[k.name] = k.value;

  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}: parse error: {}", mark(origin, e.mark), e.msg));
  }
  if (root && !root.IsNull()) {
    if (!root.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping of keys to values", origin));
    for (const auto& kv : root) {
      const auto name = kv.first.as<std::string>();
      const Key* key = find_key(name);
      if (!key) throw ConfigError(fmt::format("{}: unknown key '{}'", mark(origin, kv.first.Mark()), name));
      c.values[name] = convert(*key, kv.second, fmt::format("{}: key '{}'", mark(origin, kv.second.Mark()), name));
    }
  }

  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("--set '{}': expected key=value", o));
    const auto name = o.substr(0, eq);
    const Key* key = find_key(name);
    if (!key) throw ConfigError(fmt::format("--set '{}': unknown key '{}'", o, name));
    YAML::Node n;
    try {
      n = YAML::Load(o.substr(eq + 1));
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("--set '{}': {}", o, e.what()));
    }
    c.values[name] = convert(*key, n, fmt::format("--set '{}'", o));
  }

  resolve(c);
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return config_from_yaml("", "defaults", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_yaml(ss.str(), path, overrides);
}

std::string config_template() {
  std::string out = "# Keys ending in _mhz are ordinary frequencies (MHz, or MHz um^n) and are multiplied by 2pi.\n";
  for (const auto& k : registry()) out += fmt::format("{}: {}  # {}\n", k.name, format_value(k.value), k.note);
  return out;
}

std::string config_echo_yaml(const RunConfig& config) {
  std::string out;
  for (const auto& [name, value] : config.values.items()) out += fmt::format("{}: {}\n", name, format_value(value));
  return out;
}

}  // namespace forster
