#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forster/geometry.hpp"
#include "forster/quadrature.hpp"
#include "forster/units.hpp"

namespace forster {

/// Atomic density relative to its peak, n(b, z) = transverse(b) * longitudinal(z).
struct DensityProfile {
  enum class Shape { Uniform, Gaussian };

  Shape shape = Shape::Gaussian;
  double half_length = 40.0;  // uniform: half length; gaussian: 1/e half length (um)
  double radius = 0.0;        // transverse 1/e radius (um); 0 means transversally uniform
  double cutoff = 5.0;        // gaussian support is truncated at +-cutoff * half_length

  static DensityProfile uniform(double half_length, double radius = 0.0);
  static DensityProfile gaussian(double half_length, double radius = 0.0);

  double longitudinal(double z) const noexcept;
  double transverse(double b) const noexcept;
  double z_min() const noexcept;
  double z_max() const noexcept;
  /// Integral of longitudinal(z) over the support.
  double effective_length() const noexcept;

  void validate() const;
};

/// How the source-polariton susceptibility is evaluated.
///  Adiabatic: chi = g^2 (omega + i gamma_s) / Omega^2 + g^2 V / (Omega^2 - i gamma V)
///  Full:      chi = i g^2 D / ((gamma - i omega) D + Omega^2),  D = gamma_s - i omega - i V
/// Adiabatic is the leading order of Full for omega, gamma_s, gamma_p << Omega, gamma.
enum class SusceptibilityForm { Adiabatic, Full };

struct PropagationParams {
  double g = 0.0;           // collective coupling at peak density, angular MHz
  double omega_rabi = 0.0;  // Omega (half the control Rabi frequency), angular MHz
  double gamma = 0.0;       // half the |e> decay rate, angular MHz
  double gamma_s = 0.0;     // |S(s)> decoherence, angular MHz
  double omega = 0.0;       // source detuning, angular MHz
  double c = kSpeedOfLight;
  DensityProfile density;
  double r_min = 0.5;  // gate-distance regularization, um
  SusceptibilityForm form = SusceptibilityForm::Adiabatic;

  void validate() const;
  /// Resonant two-level optical depth along the cloud axis, 2 g^2 L_eff / (c gamma).
  double optical_depth() const;
};

/// g such that the on-axis two-level optical depth equals `od`.
double coupling_for_optical_depth(double od, double gamma, const DensityProfile& density, double c = kSpeedOfLight);

/// A stored gate excitation: position and complex C6-like coefficient of V_ef = coefficient / r^6.
struct GateExcitation {
  Point3 position;
  std::complex<double> coefficient;
};

struct TransmissionResult {
  std::complex<double> amplitude;
  double intensity = 1.0;
  double scatter_probability = 0.0;
  double phase = 0.0;

  static TransmissionResult from_amplitude(std::complex<double> amplitude);
};

/// chi at axial position z on the line through transverse point `line`. Throws DomainError
/// when the point coincides with the gate.
std::complex<double> susceptibility(double z, Point2 line, const std::optional<GateExcitation>& gate,
                                    const PropagationParams& params);

/// Transmission of a single source photon along the line at transverse offset `line`:
/// E(z_max) = E(z_min) exp((i/c) int chi dz). Throws NumericalError if the adaptive
/// quadrature does not reach the requested tolerance.
TransmissionResult transmission_freq(Point2 line, const std::optional<GateExcitation>& gate,
                                     const PropagationParams& params, const QuadratureOptions& opts = {});

/// Transmission without gate excitation.
TransmissionResult eit_baseline(const PropagationParams& params, Point2 line = {});

/// E(z_k) / E(z_min) at the sorted nodes z_nodes (all inside the support).
std::vector<std::complex<double>> field_profile(Point2 line, const std::optional<GateExcitation>& gate,
                                                const PropagationParams& params, std::span<const double> z_nodes,
                                                const QuadratureOptions& opts = {});

/// Human-readable warnings when omega, gamma_s or gamma_p exceed 0.1 min(Omega, gamma),
/// where the adiabatic elimination behind the Adiabatic form degrades.
std::vector<std::string> validity_warnings(const PropagationParams& params, double gamma_p);

}  // namespace forster
