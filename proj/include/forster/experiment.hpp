#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forster/config.hpp"

namespace forster {

inline constexpr int kSchemaVersion = 1;

/// Result files of one run, kept in memory so callers can compare or write them.
struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;  // file name, content
  nlohmann::ordered_json summary;
  double runtime_seconds = 0.0;
};

/// Runs the configured scan. Module errors propagate with the scan name prepended
/// (NumericalError stays NumericalError, DomainError becomes ConfigError).
RunOutput run_experiment(const RunConfig& config);

/// Writes all files, summary.json and timing.json (wall time is kept out of the
/// deterministic outputs) into config.output_dir.
void write_outputs(const RunConfig& config, const RunOutput& output);

/// git hash-object style SHA-1: sha1("blob <size>\0" + content), lowercase hex.
std::string git_blob_sha1(std::string_view content);

/// Indices of local maxima whose prominence exceeds n_sigma times the larger of the
/// neighbouring standard errors. Plateaus count once, at their first point.
std::vector<std::size_t> local_maxima(std::span<const double> values, std::span<const double> errors,
                                      double n_sigma = 3.0);

/// Least-squares line y = slope x + intercept with its coefficient of determination.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace forster
