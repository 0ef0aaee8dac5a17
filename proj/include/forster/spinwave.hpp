#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forster/ensemble.hpp"
#include "forster/propagation.hpp"

namespace forster {

/// Stored gate spin-wave on a uniform axial grid. rho is the density matrix in the grid basis.
struct SpinWaveState {
  std::vector<double> grid;  // um
  Eigen::MatrixXcd rho;
  double lifetime = 3.6;     // us, intrinsic coherence lifetime

  static SpinWaveState pure(std::vector<double> grid, const Eigen::VectorXcd& amplitudes, double lifetime = 3.6);
  /// Throws DomainError unless rho is Hermitian, unit trace and positive semidefinite (1e-10).
  void validate() const;
  std::size_t size() const { return grid.size(); }
};

/// Pure state with amplitude proportional to sqrt(n(z)) on `points` grid points spanning
/// +-extent * half_length.
SpinWaveState stored_spinwave(const DensityProfile& density, std::size_t points = 201, double extent = 2.0,
                              double lifetime = 3.6);

/// Per-photon channel acting on the gate position basis. Column a belongs to gate position
/// grid[a]: transmit(a) is the amplitude for the photon to leave the cloud, scatter(k, a) the
/// amplitude to scatter in axial cell k. Both operators are diagonal in the gate position.
struct PhotonChannel {
  Eigen::VectorXcd transmit;
  Eigen::MatrixXcd scatter;

  static PhotonChannel identity(std::size_t n);
  /// Position-resolving scatterer with gate-independent transmission amplitude t.
  static PhotonChannel projective(std::size_t n, std::complex<double> t);

  std::size_t size() const { return static_cast<std::size_t>(transmit.size()); }
  /// max_a | |t_a|^2 + sum_k |M_ka|^2 - 1 |.
  double completeness_error() const;
  /// D(a, b) = t_a conj(t_b) + sum_k M_ka conj(M_kb); one photon maps rho to rho o D.
  Eigen::MatrixXcd coherence() const;
};

struct ChannelOptions {
  QuadratureOptions quadrature;
  double completeness_tolerance = 1e-6;
};

/// Channel for a source photon along the line at transverse offset `source_line` from the
/// axis through a gate located at transverse position `gate_transverse` and axial position
/// grid[a]. The scattering cells are the intervals between consecutive grid nodes plus the
/// two outer intervals to the cloud edges; each carries the exact probability lost in it and
/// the propagation phase at its entrance. Throws NumericalError on a completeness violation.
PhotonChannel photon_channel(const SpinWaveState& state, const PropagationParams& params,
                             std::complex<double> coefficient, Point2 source_line = {}, Point2 gate_transverse = {},
                             const ChannelOptions& opts = {});

struct AppliedChannel {
  SpinWaveState state;             // rho_f = transmitted + scattered
  Eigen::MatrixXcd transmitted;    // t rho t^dagger
  Eigen::MatrixXcd scattered;      // sum_k M_k rho M_k^dagger
  double p_transmit = 0.0;
  double p_scatter = 0.0;
};

AppliedChannel apply_channel(const SpinWaveState& state, const PhotonChannel& channel);

/// [Tr |sqrt(a) sqrt(b)|]^2 for positive semidefinite a, b (b may be unnormalized).
/// Throws DomainError when either matrix has an eigenvalue below -1e-10 (relative to its trace).
double uhlmann_fidelity(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

struct StateFidelity {
  double fidelity = 0.0;     // against the full rho_f
  double transmitted = 0.0;  // F_p, against the transmitted branch
  double scattered = 0.0;    // F_s, against the scattered branch
};

/// Fidelity between rho_i and the channel output together with its branch contributions.
/// For pure rho_i the branch terms add up to the total exactly.
StateFidelity state_fidelity(const Eigen::MatrixXcd& rho_i, const AppliedChannel& after);

/// <psi| rho o exp(n_mean (D - 1)) |psi> for a pure initial state psi: the overlap after a
/// Poisson(n_mean) number of photons, each applying rho -> rho o D.
double poisson_overlap(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& coherence, double n_mean);

struct RetrievalSettings {
  double base_efficiency = 0.25;  // eta_0, storage and read-out without source photons
  double storage_time = 4.2;      // us
  double lifetime = 3.6;          // us
  double pulse_length = 3.2;      // us
  std::size_t grid_points = 201;
  double grid_extent = 2.0;       // grid spans +-grid_extent * L
  bool transverse_average = true;
  double max_distance = 24.0;     // um, gate-source distances beyond this do not interact
  std::size_t distance_nodes = 25;
  std::size_t gate_samples = 64;
  std::size_t beam_samples = 256;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
  /// eta_0 exp(-storage_time / lifetime).
  double efficiency_without_source() const;
};

struct RetrievalPoint {
  double n_in = 0.0;
  double n_scattered = 0.0;  // gate-induced scattered photons per stored gate photon
  double efficiency = 0.0;
  std::string variant;
};

/// Retrieval efficiency after a Poisson source pulse with each mean in n_in_means.
/// The 1D channel is averaged over the source beam at fixed gate transverse position and the
/// resulting efficiencies over the gate transverse distribution.
std::vector<RetrievalPoint> retrieval_curve(const ExperimentModel& model, double field,
                                            const RetrievalSettings& settings, std::span<const double> n_in_means,
                                            const std::string& variant = "model");

/// Efficiency for a fixed per-photon channel acting on the stored mode psi (no transverse
/// averaging): efficiency_without_source() * poisson_overlap(psi, coherence, n_mean).
double retrieval_efficiency(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& coherence, double n_mean,
                            const RetrievalSettings& settings);

/// Fraction of the beam intensity inside a disc of radius r_b around the gate, averaged over
/// the gate transverse distribution.
double blockade_beam_fraction(const ExperimentGeometry& geometry, double blockade_radius, std::size_t samples,
                              std::uint64_t seed);

struct LimitCurves {
  std::vector<RetrievalPoint> black;   // eta exp(-N_scattered)
  std::vector<RetrievalPoint> dashed;  // eta exp(-N_in)
  std::vector<RetrievalPoint> dotted;  // eta exp(-N_in * fraction)
};

/// Reference curves evaluated at the (n_in, n_scattered) pairs of a model curve.
LimitCurves limit_curves(std::span<const RetrievalPoint> model_curve, double base_efficiency,
                         double blockade_fraction);

}  // namespace forster
