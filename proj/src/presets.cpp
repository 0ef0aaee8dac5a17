#include "forster/presets.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "forster/errors.hpp"
#include "forster/units.hpp"
#include "presets/embedded.hpp"

namespace forster {

namespace {

std::string where(const std::string& origin, const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return origin;
  return fmt::format("{}:{}:{}", origin, mark.line + 1, mark.column + 1);
}

YAML::Node require(const YAML::Node& map, const char* key, const std::string& origin) {
  const YAML::Node n = map[key];
  if (!n) throw ConfigError(fmt::format("{}: missing key '{}'", where(origin, map), key));
  return n;
}

template <class T>
T scalar(const YAML::Node& n, const char* what, const std::string& origin) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: '{}' has the wrong type", where(origin, n), what));
  }
}

RydbergLevel level(const YAML::Node& n, const std::string& origin) {
  static const char* allowed[] = {"n", "l", "j", "mj"};
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::find(std::begin(allowed), std::end(allowed), key) == std::end(allowed))
      throw ConfigError(fmt::format("{}: unknown level key '{}'", where(origin, kv.first), key));
  }
  const auto l = scalar<std::string>(require(n, "l", origin), "l", origin);
  if (l != "S" && l != "P") throw ConfigError(fmt::format("{}: orbital must be S or P", where(origin, n["l"])));
  try {
    return RydbergLevel::make(scalar<int>(require(n, "n", origin), "n", origin), l == "S" ? Orbital::S : Orbital::P,
                              scalar<double>(require(n, "j", origin), "j", origin),
                              scalar<double>(require(n, "mj", origin), "mj", origin));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", where(origin, n), e.what()));
  }
}

void reject_unknown(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& origin) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(fmt::format("{}: unknown key '{}'", where(origin, kv.first), key));
  }
}

}  // namespace

InteractionParams PairPreset::interaction() const {
  InteractionParams p;
  p.c3_prime = c3_prime;
  p.gamma_p = gamma_p;
  p.c6_reference = c6_reference;
  p.channels = channel_set(pair);
  if (!p.channels.empty()) p.c3 = p.channels.front().c3;
  return p;
}

PairPreset parse_pair_preset(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }
  if (!root.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", origin));
  reject_unknown(root,
                 {"name", "gate_s", "source_s", "theta", "b_field", "c3_prime_mhz", "gamma_p_mhz", "c6_reference_mhz",
                  "field_window", "channels"},
                 origin);

  PairPreset out;
  out.source = text;
  auto& pair = out.pair;
  pair.name = root["name"] ? scalar<std::string>(root["name"], "name", origin) : origin;
  pair.gate_s = level(require(root, "gate_s", origin), origin);
  pair.source_s = level(require(root, "source_s", origin), origin);
  if (root["theta"]) pair.theta = scalar<double>(root["theta"], "theta", origin);
  if (root["b_field"]) pair.b_field = scalar<double>(root["b_field"], "b_field", origin);
  if (root["c3_prime_mhz"]) out.c3_prime = angular(scalar<double>(root["c3_prime_mhz"], "c3_prime_mhz", origin));
  if (root["gamma_p_mhz"]) out.gamma_p = angular(scalar<double>(root["gamma_p_mhz"], "gamma_p_mhz", origin));
  if (root["c6_reference_mhz"])
    out.c6_reference = angular(scalar<double>(root["c6_reference_mhz"], "c6_reference_mhz", origin));
  if (const auto w = root["field_window"]) {
    if (!w.IsSequence() || w.size() != 2 || !(w[0].as<double>() < w[1].as<double>()) || w[0].as<double>() < 0.0)
      throw ConfigError(fmt::format("{}: field_window must be [min, max] with 0 <= min < max", where(origin, w)));
    out.field_window = {w[0].as<double>(), w[1].as<double>()};
  }

  const auto channels = require(root, "channels", origin);
  if (!channels.IsSequence() || channels.size() == 0)
    throw ConfigError(fmt::format("{}: channels must be a non-empty list", where(origin, channels)));
  for (const auto& c : channels) {
    reject_unknown(c,
                   {"gate", "source", "defect_zero_field_mhz", "diff_polarizability_mhz", "zeeman_shift_mhz",
                    "c3_mhz", "weight"},
                   origin);
    PairChannel ch;
    ch.gate_state = level(require(c, "gate", origin), origin);
    ch.source_state = level(require(c, "source", origin), origin);
    ch.defect_zero_field = angular(scalar<double>(require(c, "defect_zero_field_mhz", origin), "defect", origin));
    ch.diff_polarizability =
        angular(scalar<double>(require(c, "diff_polarizability_mhz", origin), "polarizability", origin));
    ch.c3 = angular(scalar<double>(require(c, "c3_mhz", origin), "c3_mhz", origin));
    if (c["weight"]) ch.weight = scalar<double>(c["weight"], "weight", origin);
    ch.zeeman_shift = c["zeeman_shift_mhz"]
                          ? angular(scalar<double>(c["zeeman_shift_mhz"], "zeeman_shift_mhz", origin))
                          : pair_zeeman_shift(pair.gate_s, pair.source_s, ch, pair.b_field);
    if (ch.c3 < 0.0) throw ConfigError(fmt::format("{}: c3_mhz must be >= 0", where(origin, c)));
    pair.channels.push_back(ch);
  }
  try {
    for (const auto& ch : pair.channels) check_dipole_selection(pair, ch);
    out.interaction().validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }
  return out;
}

PairPreset load_pair_preset(const std::string& name_or_path) {
  for (const auto& [name, text] : embedded::kPresets)
    if (name == name_or_path) return parse_pair_preset(std::string(text), std::string(name));
  if (!std::filesystem::is_regular_file(name_or_path))
    throw ConfigError(fmt::format("pair_system '{}' is neither a preset ({}) nor a readable file", name_or_path,
                                  fmt::join(preset_names(), ", ")));
  std::ifstream in(name_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pair_preset(ss.str(), name_or_path);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : embedded::kPresets) out.emplace_back(p.first);
  return out;
}

}  // namespace forster
