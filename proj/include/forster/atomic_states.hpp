#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace forster {

enum class Orbital { S = 0, P = 1 };

/// A single Rydberg level |n l_j, m_j>. Half-integer quantum numbers are stored doubled
/// so that selection rules are exact integer arithmetic.
struct RydbergLevel {
  int n = 1;
  Orbital l = Orbital::S;
  int twice_j = 1;
  int twice_mj = 1;

  /// Builds a level from ordinary quantum numbers, e.g. make(49, Orbital::P, 0.5, 0.5).
  /// Throws DomainError when the labels are inconsistent.
  static RydbergLevel make(int n, Orbital l, double j, double mj);

  double j() const noexcept { return 0.5 * twice_j; }
  double mj() const noexcept { return 0.5 * twice_mj; }
  int l_value() const noexcept { return static_cast<int>(l); }

  /// Throws DomainError unless n >= 1, j in {1/2, 3/2}, |m_j| <= j, S implies j = 1/2.
  void validate() const;

  /// Lande g-factor with g_s = 2.
  double lande_g() const noexcept;

  /// e.g. "49P3/2(mj=-1/2)"
  std::string label() const;

  friend bool operator==(const RydbergLevel&, const RydbergLevel&) = default;
};

/// One |P(g), P(s)> pair state coupled to the |S(g), S(s)> pair. The Forster defect
/// follows the quadratic Stark model
///   defect(eps) = defect_zero_field - diff_polarizability * eps^2 + zeeman_shift.
struct PairChannel {
  RydbergLevel gate_state;
  RydbergLevel source_state;
  double defect_zero_field = 0.0;    // angular MHz
  double diff_polarizability = 0.0;  // angular MHz / (V/cm)^2
  double zeeman_shift = 0.0;         // angular MHz, fixed for the configured B field
  double c3 = 0.0;                   // angular MHz um^3, >= 0
  double weight = 1.0;               // multiplies c3; carries the angular dependence for theta != 0
};

struct PairConfig {
  std::string name;
  RydbergLevel gate_s;    // |S(g)>
  RydbergLevel source_s;  // |S(s)>
  std::vector<PairChannel> channels;
  double theta = 0.0;    // rad, interatomic axis vs quantization axis
  double b_field = 1.0;  // G
};

/// Forster defect of a channel at field `field` (V/cm), in angular MHz.
double forster_defect(const PairChannel& channel, double field) noexcept;

/// Zeeman shift of the P pair relative to the S pair, mu_B * B * sum(g_j m_j), angular MHz.
double pair_zeeman_shift(const RydbergLevel& gate_s, const RydbergLevel& source_s,
                         const PairChannel& channel, double b_field) noexcept;

/// Throws DomainError when the channel is not an electric-dipole partner of the S pair
/// (each atom needs delta_l = +-1, |delta_j| <= 1, |delta_m_j| <= 1).
void check_dipole_selection(const PairConfig& config, const PairChannel& channel);

/// Channels that take part in the interaction. At theta = 0 only channels conserving the
/// total projection (delta m_j(g) + delta m_j(s) = 0) survive; for theta != 0 the
/// configured list is returned unchanged and the angular dependence lives in the weights.
std::vector<PairChannel> channel_set(const PairConfig& config);

struct Resonance {
  double field = 0.0;
  std::size_t channel = 0;  // index into channel_set(config)

  friend bool operator==(const Resonance&, const Resonance&) = default;
};

/// All zero crossings of the channel defects in [0, field_max], sorted by field.
/// Roots are bracketed on a fine scan and refined by bisection to `tolerance`.
std::vector<Resonance> resonance_fields(const PairConfig& config, double field_max,
                                        double tolerance = 1e-10);

}  // namespace forster
