#pragma once

#include <numbers>

// Unit convention used throughout the library:
//   energies and rates   angular MHz (rad/us), i.e. 2*pi * MHz
//   lengths              um
//   times                us
//   electric fields      V/cm
//   magnetic fields      G
namespace forster {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Speed of light in um/us.
inline constexpr double kSpeedOfLight = 299792458.0;

/// Bohr magneton in MHz/G (h = 1).
inline constexpr double kBohrMagnetonMHzPerGauss = 1.39962449361;

/// Converts an ordinary frequency in MHz to angular MHz.
constexpr double angular(double mhz) noexcept { return kTwoPi * mhz; }

/// Converts angular MHz back to ordinary MHz.
constexpr double ordinary(double angular_mhz) noexcept { return angular_mhz / kTwoPi; }

}  // namespace forster
