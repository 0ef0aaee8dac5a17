#include "forster/interaction.hpp"

#include <cmath>

#include <fmt/format.h>

#include "forster/errors.hpp"

namespace forster {

void InteractionParams::validate() const {
  if (c3 < 0.0 || c3_prime < 0.0) throw DomainError("dipolar couplings C3, C3' must be >= 0");
  if (gamma_p < 0.0) throw DomainError("gamma_p must be >= 0");
  if (c6_reference < 0.0) throw DomainError("c6_reference must be >= 0");
  for (const auto& ch : channels)
    if (ch.c3 < 0.0) throw DomainError("channel c3 must be >= 0");
}

Matrix4c dipole_hamiltonian(double r, const InteractionParams& params) {
  if (!(r > 0.0)) throw DomainError(fmt::format("dipole_hamiltonian: separation r = {} must be > 0", r));
  const double inv_r3 = 1.0 / (r * r * r);
  const double a = params.c3 * inv_r3;
  const double b = params.c3_prime * inv_r3;
  Matrix4c h;
  // clang-format off
  h << 0, a, b, 0,
       a, 0, 0, b,
       b, 0, 0, a,
       0, b, a, 0;
  // clang-format on
  return h;
}

std::complex<double> interaction_coefficient(const InteractionParams& params, double field, double omega) {
  std::complex<double> sum{0.0, 0.0};
  for (const auto& ch : params.channels) {
    const double coupling = ch.weight * ch.c3;
    const std::complex<double> denom{forster_defect(ch, field) - omega, -params.gamma_p};
    sum += coupling * coupling / denom;
  }
  return sum;
}

std::complex<double> effective_potential(double r, double gate_pos, double omega, double field,
                                         const InteractionParams& params) {
  const double d = r - gate_pos;
  if (d == 0.0) throw DomainError("effective_potential: source position coincides with the gate (1/r^6 singularity)");
  const double d2 = d * d;
  return interaction_coefficient(params, field, omega) / (d2 * d2 * d2);
}

double blockade_radius(double c6, double gamma, double omega_rabi) {
  if (!(c6 > 0.0) || !(gamma > 0.0) || !(omega_rabi > 0.0))
    throw DomainError("blockade_radius: C6, gamma and Omega must all be > 0");
  return std::pow(gamma * c6 / (omega_rabi * omega_rabi), 1.0 / 6.0);
}

double hopping_suppression(const InteractionParams& params) {
  if (!(params.c3 > 0.0)) throw DomainError("hopping_suppression: C3 must be > 0");
  return params.c3_prime / params.c3;
}

bool hopping_negligible(const InteractionParams& params, double threshold) {
  return hopping_suppression(params) < threshold;
}

}  // namespace forster
