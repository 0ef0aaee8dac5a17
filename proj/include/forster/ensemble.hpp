#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "forster/geometry.hpp"
#include "forster/interaction.hpp"
#include "forster/propagation.hpp"
#include "forster/random.hpp"

namespace forster {

enum class GateDistribution { DensityTimesBeam, Pinned };

/// Beam and cloud geometry. The cloud is a cylindrical Gaussian with 1/e half length L and
/// 1/e radius R; the source and gate beams share the 1/e^2 intensity waist w0.
struct ExperimentGeometry {
  double beam_waist = 6.2;         // um
  double cloud_half_length = 40.0; // um
  double cloud_radius = 10.0;      // um
  double atom_number = 2.0e4;
  double wavelength = 0.78024;     // um, probe transition
  GateDistribution gate_distribution = GateDistribution::DensityTimesBeam;
  Point3 pinned_gate;              // used with GateDistribution::Pinned

  void validate() const;
  DensityProfile density() const;
  /// Peak atomic density in um^-3.
  double peak_density() const;
  /// Collective coupling g at peak density for the resonant cross section 3 lambda^2 / (2 pi).
  double coupling(double gamma) const;

  /// Gate position drawn from density x gate-beam intensity.
  Point3 sample_gate(Rng& rng) const;
  /// Source photon transverse position drawn from the beam intensity profile.
  Point2 sample_source(Rng& rng) const;
  /// Per-axis standard deviations of the two sampling distributions.
  double gate_sigma_transverse() const;
  double source_sigma() const;
};

struct PhotonStats {
  double gate_mean_in = 1.0;          // mean incident gate photons
  double source_rate = 35.0;          // us^-1
  double pulse_length = 20.0;         // us
  double storage_efficiency = 0.6;
  double detector_efficiency = 0.3;
  double dephasing_per_photon = 0.0;  // probability a scattered source photon leaves a stationary excitation
  double rate_ceiling = 1000.0;       // us^-1, returned when nothing limits the rate

  void validate() const;
  /// Probability that at least one gate excitation is stored, 1 - exp(-gate_mean_in * storage_efficiency).
  double storage_probability() const;
  /// Mean incident source photons per pulse.
  double source_mean() const { return source_rate * pulse_length; }
};

struct SamplingOptions {
  std::size_t min_samples = 2000;
  std::size_t max_samples = 2000;
  double target_std_error = 0.0;  // on T1; 0 disables the adaptive extension
  std::uint64_t seed = 1;
  int threads = 0;
};

struct AverageTransmission {
  double t0 = 1.0;
  double t0_error = 0.0;
  double t1 = 1.0;
  double t1_error = 0.0;
  double difference_error = 0.0;  // standard error of T0 - T1 (paired samples)
  std::size_t samples = 0;
  std::vector<std::string> warnings;
};

/// Everything needed to turn a field value into transmissions.
struct ExperimentModel {
  ExperimentGeometry geometry;
  PropagationParams propagation;  // density and g are expected to match the geometry
  InteractionParams interaction;
  double field_resolution = 0.002;  // V/cm, half width of the boxcar resolution kernel

  void validate() const;
};

/// Gate coefficient as a function of the applied field.
using CoefficientFn = std::function<std::complex<double>(double field)>;

/// Monte Carlo average of the source transmission over source position (beam profile) and
/// gate position. Samples use common random numbers: sample i is identical for every field.
/// With field_jitter > 0 every sample is evaluated at field + u, u uniform in
/// [-field_jitter, field_jitter], which averages over a boxcar resolution kernel.
AverageTransmission average_transmission(const ExperimentGeometry& geometry, const PropagationParams& params,
                                         const CoefficientFn& coefficient, double field, const SamplingOptions& opts,
                                         double field_jitter = 0.0);

AverageTransmission average_transmission(const ExperimentModel& model, double field, const SamplingOptions& opts,
                                         double field_jitter = 0.0);

/// Beam-averaged transmission for each of `gate_samples` fixed gate positions, with the
/// same `beam_samples` source positions for every gate. t1[j] belongs to gate sample j.
struct GateResolvedTransmission {
  double t0 = 1.0;
  std::vector<double> t1;
  std::vector<Point3> gates;
};

GateResolvedTransmission gate_resolved_transmission(const ExperimentModel& model, double field,
                                                    std::size_t gate_samples, std::size_t beam_samples,
                                                    std::uint64_t seed, int threads = 0);

/// G = (N_no_gate - N_with_gate) / N_g,in with N_no_gate = R T T0 and
/// N_with_gate = R T [(1 - p) T0 + p T1], p the storage probability.
double optical_gain(double t0, double t1, const PhotonStats& stats);

/// Direct form of the gain definition from mean source counts.
double optical_gain_from_counts(double n_no_gate, double n_with_gate, double gate_mean_in);

struct GainPoint {
  double field = 0.0;
  double gain = 0.0;
  double std_error = 0.0;
  double t0 = 1.0;
  double t1 = 1.0;
};

/// Gain over a sorted field grid, averaged over the boxcar field resolution of the model.
std::vector<GainPoint> field_scan(const ExperimentModel& model, std::span<const double> fields,
                                  const PhotonStats& stats, const SamplingOptions& opts);

/// Numerical boxcar average of tabulated values: out(x_i) = mean of the piecewise-linear
/// interpolant over [x_i - half_width, x_i + half_width] (clamped to the grid ends).
std::vector<double> boxcar_convolve(std::span<const double> grid, std::span<const double> values,
                                    double half_width);

struct NondestructiveLimit {
  double max_rate = 0.0;           // us^-1
  double blockade_fraction = 0.0;  // relative drop of T0 caused by one stationary excitation
  double t0 = 1.0;
  bool bounded = false;            // false when max_rate is the configured ceiling
};

/// Largest source rate for which stationary excitations (p_deph per scattered source photon,
/// each blockading like a gate excitation with the zero-field coefficient) lower the
/// end-of-pulse transmission by less than `max_drop`:
///   1 - exp(-p_deph R T (1 - T0) f) < max_drop,  f = (T0 - T1_ref) / T0.
NondestructiveLimit nondestructive_limit(double t0, double blockade_fraction, const PhotonStats& stats,
                                         double max_drop = 0.1);
NondestructiveLimit nondestructive_limit(const ExperimentModel& model, const PhotonStats& stats,
                                         const SamplingOptions& opts, double max_drop = 0.1);

}  // namespace forster
