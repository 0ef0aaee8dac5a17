#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forster/ensemble.hpp"

namespace forster {

/// Detected source counts per shot. Without a stored excitation counts are Poisson(mu0);
/// with one they are Poisson(mu1), or, when present_means is non-empty, an equal-weight
/// Poisson mixture over present_means (one entry per gate position sample).
struct CountModel {
  double mean_no_excitation = 0.0;
  double mean_with_excitation = 0.0;
  double p_excitation = 0.0;
  std::vector<double> present_means;

  void validate() const;
  /// Probability mass of the count distribution given an excitation, counts 0..max_count.
  std::vector<double> present_pmf(std::size_t max_count) const;
  std::vector<double> absent_pmf(std::size_t max_count) const;
  /// A count above which both distributions carry negligible mass.
  std::size_t count_cutoff() const;
};

using Histogram = std::vector<double>;

struct CountHistograms {
  Histogram gate_pulse;
  Histogram no_gate_pulse;
};

/// Simulates `shots` shots with and without gate pulse. Shots are generated in fixed blocks,
/// each with its own seeded stream, so the result does not depend on the thread count.
CountHistograms count_histograms(const CountModel& model, std::size_t shots, std::uint64_t seed, int threads = 0);

struct SeparatedHistograms {
  Histogram present;
  Histogram absent;
  std::vector<std::string> warnings;
};

/// Splits the gate-pulse histogram into the excitation-present and -absent parts by removing
/// the expected (1 - p) N Poisson(mu0) component bin by bin. Negative bins are clipped and the
/// present part is rescaled to p N counts.
SeparatedHistograms separate_histograms(std::span<const double> gate_pulse, double p_excitation, double mu0);

struct FidelityResult {
  double fidelity = 0.5;
  std::size_t threshold = 0;  // decide "present" when count < threshold
  bool chance_level = false;  // no threshold beats guessing; fidelity is 0.5
  double weighted_accuracy = 0.5;  // prior-weighted accuracy at the chosen threshold
};

/// F = max over integer thresholds t of min(P(count < t | present), P(count >= t | absent)),
/// floored at the chance level 0.5; ties resolve to the smallest t. `prior_present` only
/// enters weighted_accuracy.
FidelityResult detection_fidelity(std::span<const double> present, std::span<const double> absent,
                                  double prior_present = 0.5);

/// Threshold maximizing the prior-weighted accuracy p P(c < t | present) + (1 - p) P(c >= t | absent).
FidelityResult weighted_detection_fidelity(std::span<const double> present, std::span<const double> absent,
                                           double prior_present);

struct FidelityOptions {
  std::size_t gate_samples = 48;
  std::size_t beam_samples = 96;
  std::size_t resolution_nodes = 8;  // midpoint nodes of the field-resolution boxcar
  std::uint64_t seed = 1;
  int threads = 0;
};

struct FidelityPoint {
  double field = 0.0;
  double rate = 0.0;
  double fidelity = 0.5;
  double mu0 = 0.0;
  double mu1 = 0.0;
};

/// Count model for one field and source rate: mu0 = eta R T T0 and one present mean per
/// gate sample, eta R T T1(gate).
CountModel count_model(const GateResolvedTransmission& transmission, const PhotonStats& stats);

/// Fidelity over fields x rates from the exact count distributions, averaged over the
/// boxcar field resolution. Output is field-major.
std::vector<FidelityPoint> fidelity_scan(const ExperimentModel& model, std::span<const double> fields,
                                         std::span<const double> rates, const PhotonStats& stats,
                                         const FidelityOptions& opts);

}  // namespace forster
