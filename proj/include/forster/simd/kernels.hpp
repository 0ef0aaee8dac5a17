#pragma once

#include <optional>
#include <span>
#include <string_view>

// Data-parallel inner loops. Every kernel has a portable scalar reference and, on x86-64,
// an AVX2 variant; the variant is chosen once at runtime from CPUID and can be pinned with
// the FORSTER_SIMD environment variable ("scalar" or "avx2") or set_isa_override().
// Kernels are compiled with floating-point contraction disabled and mirror the reference
// operation order, so the variants agree bit for bit.
namespace forster::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

/// ISA used by the dispatching entry points.
Isa active_isa() noexcept;

/// Pins the dispatch target (std::nullopt restores automatic selection).
/// Throws std::invalid_argument when the ISA is not available on this CPU.
void set_isa_override(std::optional<Isa> isa);

/// Constants of the single-polariton susceptibility along one line through the cloud.
///   chi(z) = n(z) * [ eit + g2 V / (omega2 - i gamma V) ],   V = c6 / max(d^2, r_min2)^3
/// with d^2 = transverse2 + (z - gate_z)^2. `eit` is g^2 (omega + i gamma_s) / Omega^2.
struct SusceptibilityArgs {
  double eit_re = 0.0;
  double eit_im = 0.0;
  double g2 = 0.0;
  double omega2 = 1.0;
  double gamma = 0.0;
  double c6_re = 0.0;
  double c6_im = 0.0;
  double gate_z = 0.0;
  double transverse2 = 0.0;
  double r_min2 = 0.25;
  bool has_gate = false;
};

/// re[k] + i im[k] = chi(z[k]) with local relative density density[k].
void susceptibility(const SusceptibilityArgs& args, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im);

/// acc[i*n + j] += weight * a[i] * conj(a[j]) for a complex vector a of length n, stored as
/// split real/imaginary arrays; acc is an n x n row-major split-complex matrix.
void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im);

namespace scalar {
void susceptibility(const SusceptibilityArgs& args, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im);
void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im);
}  // namespace scalar

namespace avx2 {
void susceptibility(const SusceptibilityArgs& args, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im);
void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im);
}  // namespace avx2

}  // namespace forster::simd
