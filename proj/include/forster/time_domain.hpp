#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "forster/geometry.hpp"
#include "forster/propagation.hpp"

namespace forster {

/// One |P(g), P(s)> channel resolved in time: V(r) = c3 / r^3 couples |S(s)>|S(g)> to the
/// channel amplitude, which carries the Forster defect.
struct ResonantChannel {
  double c3 = 0.0;      // angular MHz um^3 (already including any angular weight)
  double defect = 0.0;  // angular MHz
};

struct ResolvedGate {
  Point3 position;
  std::vector<ResonantChannel> channels;
  double gamma_p = 0.0;

  /// Coefficient of the adiabatically eliminated potential, sum c3^2 / (defect - omega - i gamma_p).
  std::complex<double> coefficient(double omega) const;
  GateExcitation excitation(double omega) const { return {position, coefficient(omega)}; }
};

/// Discretization of the (z, t) integration.
///
/// The photon field is advected with a first-order upwind scheme at a reduced simulation
/// light speed; the collective coupling is rescaled by g^2 -> g^2 light_speed / c so the
/// steady state (which depends on g^2 / c only) is unchanged. Local amplitudes evolve with
/// the exact exponential of their linear generator over each time step.
struct OracleSettings {
  double dz = 0.05;           // um
  double dt = 0.0;            // us; 0 selects dz / light_speed (Courant number 1)
  double light_speed = 20.0;  // um/us
  double ramp_time = 1.0;     // us, sin^2 switch-on of the monochromatic input
  double max_time = 400.0;    // us
  double settle_window = 0.5;      // us between steady-state checks
  double settle_tolerance = 2e-7;  // relative change of |E_out|^2 per window
};

struct OracleResult {
  TransmissionResult transmission;
  double final_time = 0.0;
  long steps = 0;
  std::size_t cells = 0;
  double courant = 0.0;
};

/// Integrates the coupled photon / |e> / |S(s)> / |P(s)P(g)> amplitudes along the line at
/// transverse offset `line` for a quasi-monochromatic input at detuning params.omega and
/// returns the steady-state transmission. params.form is ignored (the dynamics are exact).
/// Throws ConfigError for a Courant number above 1 or non-positive steps, and
/// NumericalError if no steady state is reached before max_time.
OracleResult transmission_time_oracle(const PropagationParams& params, const std::optional<ResolvedGate>& gate,
                                      Point2 line, const OracleSettings& settings = {});

}  // namespace forster
