#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "forster/atomic_states.hpp"

namespace forster {

struct InteractionParams {
  double c3 = 0.0;        // angular MHz um^3, direct |SS> <-> |PP> coupling
  double c3_prime = 0.0;  // angular MHz um^3, exchange coupling driving hopping
  double gamma_p = 0.0;   // decoherence rate of |P(s)>, angular MHz
  std::vector<PairChannel> channels;
  double c6_reference = 0.0;  // zero-field van der Waals coefficient, angular MHz um^6

  /// Throws DomainError when any coupling or rate is negative.
  void validate() const;
};

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;

/// Dipole-dipole Hamiltonian in the ordered basis {|SS>, |PP>, |P'P'>, |S'S'>}:
/// (1/r^3) [[0, C3, C3', 0], [C3, 0, 0, C3'], [C3', 0, 0, C3], [0, C3', C3, 0]].
Matrix4c dipole_hamiltonian(double r, const InteractionParams& params);

/// Complex van der Waals coefficient of the adiabatically eliminated pair interaction,
///   sum_alpha (w_alpha C3_alpha)^2 / (defect_alpha(field) - omega - i gamma_p),
/// so that V_ef(r) = interaction_coefficient(...) / |r - r_j|^6. Im >= 0 for gamma_p >= 0.
std::complex<double> interaction_coefficient(const InteractionParams& params, double field, double omega);

/// Effective potential felt by a source polariton at r from a gate excitation at gate_pos.
/// Throws DomainError at r == gate_pos.
std::complex<double> effective_potential(double r, double gate_pos, double omega, double field,
                                         const InteractionParams& params);

/// r_b = (gamma C6 / Omega^2)^(1/6).
double blockade_radius(double c6, double gamma, double omega_rabi);

/// C3' / C3. Values well below 1 justify pinning the gate excitation in place.
double hopping_suppression(const InteractionParams& params);

/// True when hopping_suppression(params) < threshold.
bool hopping_negligible(const InteractionParams& params, double threshold = 0.1);

}  // namespace forster
