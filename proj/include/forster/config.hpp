#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "forster/detection.hpp"
#include "forster/ensemble.hpp"
#include "forster/presets.hpp"
#include "forster/spinwave.hpp"
#include "forster/time_domain.hpp"

namespace forster {

enum class ScanKind { StarkMap, GainScan, FidelityScan, Retrieval, OracleCheck };

/// Throws ConfigError for an unknown scan name.
ScanKind parse_scan(const std::string& name);
std::string scan_name(ScanKind scan);

/// A validated run. `values` is the resolved flat key map (MHz keys in ordinary MHz) and
/// fully determines the run; the typed members are derived from it.
struct RunConfig {
  nlohmann::ordered_json values;

  ScanKind scan = ScanKind::GainScan;
  PairPreset preset;
  ExperimentModel model;
  PhotonStats stats;
  SamplingOptions sampling;
  FidelityOptions fidelity;
  RetrievalSettings retrieval;
  OracleSettings oracle;

  std::vector<double> field_grid;
  std::vector<double> rate_grid;
  std::vector<double> source_means;
  std::size_t histogram_shots = 0;
  std::size_t retrieval_resolution_nodes = 1;
  double retrieval_field = 0.0;
  std::size_t oracle_sets = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output_dir;
};

/// Builds a run from YAML text (empty text selects every default) and `key=value`
/// overrides. Unknown keys, type mismatches and invariant violations throw ConfigError
/// with the offending key and, for file input, its line.
RunConfig config_from_yaml(const std::string& text, const std::string& origin,
                           const std::vector<std::string>& overrides = {});

/// Reads `path` and calls config_from_yaml. An empty path means no file.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// YAML document listing every key with its default and a one-line note.
std::string config_template();

/// The resolved key map as YAML; loading it reproduces the run.
std::string config_echo_yaml(const RunConfig& config);

}  // namespace forster
