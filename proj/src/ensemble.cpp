#include "forster/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "forster/errors.hpp"
#include "forster/parallel.hpp"

namespace forster {

namespace {

// Random stream identifiers; every consumer of randomness draws from its own stream.
constexpr std::uint64_t kStreamTransmission = 0x7472616e73ull;
constexpr std::uint64_t kStreamGates = 0x6761746573ull;
constexpr std::uint64_t kStreamBeam = 0x6265616dull;

double normal(Rng& rng, double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng); }

struct MeanAccumulator {
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum2 += x * x;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double std_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

void ExperimentGeometry::validate() const {
  if (!(beam_waist > 0.0) || !(cloud_half_length > 0.0) || !(cloud_radius > 0.0))
    throw DomainError("geometry lengths must be > 0");
  if (!(atom_number > 0.0)) throw DomainError("atom_number must be > 0");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be > 0");
}

DensityProfile ExperimentGeometry::density() const {
  return DensityProfile::gaussian(cloud_half_length, cloud_radius);
}

double ExperimentGeometry::peak_density() const {
  return atom_number / (std::pow(kPi, 1.5) * cloud_radius * cloud_radius * cloud_half_length);
}

double ExperimentGeometry::coupling(double gamma) const {
  const double cross_section = 3.0 * wavelength * wavelength / kTwoPi;
  return std::sqrt(0.5 * cross_section * peak_density() * kSpeedOfLight * gamma);
}

double ExperimentGeometry::gate_sigma_transverse() const {
  return std::sqrt(0.5 / (1.0 / (cloud_radius * cloud_radius) + 2.0 / (beam_waist * beam_waist)));
}

double ExperimentGeometry::source_sigma() const { return 0.5 * beam_waist; }

Point3 ExperimentGeometry::sample_gate(Rng& rng) const {
  if (gate_distribution == GateDistribution::Pinned) return pinned_gate;
  const double st = gate_sigma_transverse();
  const double sz = cloud_half_length / std::sqrt(2.0);
  const double zmax = density().z_max();
  double z = 0.0;
  do {
    z = normal(rng, sz);
  } while (std::abs(z) > zmax);
  const double x = normal(rng, st);
  const double y = normal(rng, st);
  return {x, y, z};
}

Point2 ExperimentGeometry::sample_source(Rng& rng) const {
  const double s = source_sigma();
  const double x = normal(rng, s);
  const double y = normal(rng, s);
  return {x, y};
}

void PhotonStats::validate() const {
  if (!(storage_efficiency >= 0.0 && storage_efficiency <= 1.0))
    throw DomainError("storage_efficiency must lie in [0, 1]");
  if (!(detector_efficiency >= 0.0 && detector_efficiency <= 1.0))
    throw DomainError("detector_efficiency must lie in [0, 1]");
  if (!(dephasing_per_photon >= 0.0 && dephasing_per_photon <= 1.0))
    throw DomainError("dephasing_per_photon must lie in [0, 1]");
  if (!(gate_mean_in >= 0.0)) throw DomainError("gate_mean_in must be >= 0");
  if (!(source_rate >= 0.0)) throw DomainError("source_rate must be >= 0");
  if (!(pulse_length >= 0.0)) throw DomainError("pulse_length must be >= 0");
  if (!(rate_ceiling > 0.0)) throw DomainError("rate_ceiling must be > 0");
}

double PhotonStats::storage_probability() const { return -std::expm1(-gate_mean_in * storage_efficiency); }

void ExperimentModel::validate() const {
  geometry.validate();
  propagation.validate();
  interaction.validate();
  if (!(field_resolution >= 0.0)) throw DomainError("field_resolution must be >= 0");
}

AverageTransmission average_transmission(const ExperimentGeometry& geometry, const PropagationParams& params,
                                         const CoefficientFn& coefficient, double field, const SamplingOptions& opts,
                                         double field_jitter) {
  geometry.validate();
  params.validate();
  if (opts.min_samples < 2) throw DomainError("at least two Monte Carlo samples are required");
  const double axis_intensity = eit_baseline(params).intensity;
  const bool jitter = field_jitter > 0.0;
  const std::complex<double> fixed = jitter ? std::complex<double>{} : coefficient(field);

  std::vector<double> i0;
  std::vector<double> i1;
  AverageTransmission out;
  std::size_t target = std::max(opts.min_samples, std::size_t{2});
  const std::size_t ceiling = std::max(opts.max_samples, target);
  for (;;) {
    const std::size_t done = i0.size();
    i0.resize(target);
    i1.resize(target);
    parallel_for(target - done, opts.threads, [&](std::size_t k) {
      const std::size_t idx = done + k;
      Rng rng = make_rng(opts.seed, kStreamTransmission, idx);
      const Point2 b = geometry.sample_source(rng);
      const Point3 r = geometry.sample_gate(rng);
      const double u = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      const std::complex<double> c = jitter ? coefficient(field + u * field_jitter) : fixed;
      i0[idx] = std::pow(axis_intensity, params.density.transverse(b.norm()));
      i1[idx] = transmission_freq(b, GateExcitation{r, c}, params).intensity;
    });
    MeanAccumulator a0, a1, ad;
    for (std::size_t k = 0; k < target; ++k) {
      a0.add(i0[k]);
      a1.add(i1[k]);
      ad.add(i0[k] - i1[k]);
    }
    out = AverageTransmission{a0.mean(), a0.std_error(), a1.mean(), a1.std_error(), ad.std_error(), target, {}};
    if (opts.target_std_error <= 0.0 || out.t1_error <= opts.target_std_error) break;
    if (target >= ceiling) {
      out.warnings.push_back(fmt::format("sample budget {} exhausted: standard error {:.3g} above target {:.3g}",
                                         ceiling, out.t1_error, opts.target_std_error));
      break;
    }
    target = std::min(ceiling, 2 * target);
  }
  return out;
}

AverageTransmission average_transmission(const ExperimentModel& model, double field, const SamplingOptions& opts,
                                         double field_jitter) {
  const double omega = model.propagation.omega;
  const auto& inter = model.interaction;
  return average_transmission(
      model.geometry, model.propagation,
      [&](double f) { return interaction_coefficient(inter, f, omega); }, field, opts, field_jitter);
}

GateResolvedTransmission gate_resolved_transmission(const ExperimentModel& model, double field,
                                                    std::size_t gate_samples, std::size_t beam_samples,
                                                    std::uint64_t seed, int threads) {
  if (gate_samples == 0 || beam_samples == 0) throw DomainError("gate and beam sample counts must be >= 1");
  const auto& params = model.propagation;
  const auto coefficient = interaction_coefficient(model.interaction, field, params.omega);
  const double axis_intensity = eit_baseline(params).intensity;

  std::vector<Point2> beam(beam_samples);
  double t0 = 0.0;
  for (std::size_t k = 0; k < beam_samples; ++k) {
    Rng rng = make_rng(seed, kStreamBeam, k);
    beam[k] = model.geometry.sample_source(rng);
    t0 += std::pow(axis_intensity, params.density.transverse(beam[k].norm()));
  }
  GateResolvedTransmission out;
  out.t0 = t0 / static_cast<double>(beam_samples);
  out.gates.resize(gate_samples);
  for (std::size_t j = 0; j < gate_samples; ++j) {
    Rng rng = make_rng(seed, kStreamGates, j);
    out.gates[j] = model.geometry.sample_gate(rng);
  }
  std::vector<double> values(gate_samples * beam_samples);
  parallel_for(values.size(), threads, [&](std::size_t idx) {
    const std::size_t j = idx / beam_samples;
    const std::size_t k = idx % beam_samples;
    values[idx] = transmission_freq(beam[k], GateExcitation{out.gates[j], coefficient}, params).intensity;
  });
  out.t1.assign(gate_samples, 0.0);
  for (std::size_t j = 0; j < gate_samples; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < beam_samples; ++k) sum += values[j * beam_samples + k];
    out.t1[j] = sum / static_cast<double>(beam_samples);
  }
  return out;
}

double optical_gain(double t0, double t1, const PhotonStats& stats) {
  const double n_source = stats.source_mean();
  const double p = stats.storage_probability();
  // N_no_gate - N_with_gate = N_source p (t0 - t1)
  if (!(stats.gate_mean_in > 0.0)) throw DomainError("gate_mean_in must be > 0 to define a gain");
  return n_source * p * (t0 - t1) / stats.gate_mean_in;
}

double optical_gain_from_counts(double n_no_gate, double n_with_gate, double gate_mean_in) {
  if (!(gate_mean_in > 0.0)) throw DomainError("gate_mean_in must be > 0 to define a gain");
  return (n_no_gate - n_with_gate) / gate_mean_in;
}

std::vector<GainPoint> field_scan(const ExperimentModel& model, std::span<const double> fields,
                                  const PhotonStats& stats, const SamplingOptions& opts) {
  model.validate();
  stats.validate();
  if (!std::is_sorted(fields.begin(), fields.end())) throw DomainError("field grid must be sorted");
  const double scale = optical_gain(1.0, 0.0, stats);
  std::vector<GainPoint> out;
  out.reserve(fields.size());
  for (double f : fields) {
    const auto avg = average_transmission(model, f, opts, model.field_resolution);
    out.push_back({f, optical_gain(avg.t0, avg.t1, stats), scale * avg.difference_error, avg.t0, avg.t1});
  }
  return out;
}

std::vector<double> boxcar_convolve(std::span<const double> grid, std::span<const double> values,
                                    double half_width) {
  if (grid.size() != values.size()) throw DomainError("boxcar_convolve: grid and values differ in length");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("boxcar_convolve: grid must be sorted");
  const std::size_t n = grid.size();
  if (n < 2 || half_width <= 0.0) return {values.begin(), values.end()};
  // Integral of the piecewise-linear interpolant from grid[0] to x.
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cumulative[i] = cumulative[i - 1] + 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  const auto primitive = [&](double x) {
    x = std::clamp(x, grid.front(), grid.back());
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(grid.begin(), it));
    i = std::clamp<std::size_t>(i, 1, n - 1);
    const double h = grid[i] - grid[i - 1];
    const double s = x - grid[i - 1];
    const double slope = h > 0.0 ? (values[i] - values[i - 1]) / h : 0.0;
    return cumulative[i - 1] + s * (values[i - 1] + 0.5 * slope * s);
  };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(grid.front(), grid[i] - half_width);
    const double b = std::min(grid.back(), grid[i] + half_width);
    out[i] = b > a ? (primitive(b) - primitive(a)) / (b - a) : values[i];
  }
  return out;
}

NondestructiveLimit nondestructive_limit(double t0, double blockade_fraction, const PhotonStats& stats,
                                         double max_drop) {
  if (!(max_drop > 0.0 && max_drop < 1.0)) throw DomainError("max_drop must lie in (0, 1)");
  NondestructiveLimit out;
  out.t0 = t0;
  out.blockade_fraction = blockade_fraction;
  const double per_rate = stats.dephasing_per_photon * stats.pulse_length * (1.0 - t0) * blockade_fraction;
  if (per_rate <= 0.0) {
    out.max_rate = stats.rate_ceiling;
    return out;
  }
  out.max_rate = -std::log1p(-max_drop) / per_rate;
  out.bounded = out.max_rate < stats.rate_ceiling;
  out.max_rate = std::min(out.max_rate, stats.rate_ceiling);
  return out;
}

NondestructiveLimit nondestructive_limit(const ExperimentModel& model, const PhotonStats& stats,
                                         const SamplingOptions& opts, double max_drop) {
  stats.validate();
  const std::complex<double> c6{model.interaction.c6_reference, 0.0};
  const auto avg =
      average_transmission(model.geometry, model.propagation, [c6](double) { return c6; }, 0.0, opts);
  const double fraction = avg.t0 > 0.0 ? (avg.t0 - avg.t1) / avg.t0 : 0.0;
  return nondestructive_limit(avg.t0, fraction, stats, max_drop);
}

}  // namespace forster
