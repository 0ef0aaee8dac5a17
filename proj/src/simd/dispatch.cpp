#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "forster/simd/kernels.hpp"

namespace forster::simd {

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("FORSTER_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& override_slot() {
  static std::atomic<int> slot{-1};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && !defined(FORSTER_NO_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept {
  const int forced = override_slot().load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa detected = detect();
  return detected;
}

void set_isa_override(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa))
    throw std::invalid_argument(std::string("ISA not available on this CPU: ") + std::string(isa_name(*isa)));
  override_slot().store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

void susceptibility(const SusceptibilityArgs& args, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im) {
  if (active_isa() == Isa::Avx2)
    avx2::susceptibility(args, z, density, re, im);
  else
    scalar::susceptibility(args, z, density, re, im);
}

void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im) {
  if (active_isa() == Isa::Avx2)
    avx2::accumulate_outer(a_re, a_im, weight, acc_re, acc_im);
  else
    scalar::accumulate_outer(a_re, a_im, weight, acc_re, acc_im);
}

}  // namespace forster::simd
