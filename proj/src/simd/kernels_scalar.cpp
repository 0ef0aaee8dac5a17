#include <cstddef>

#include "forster/simd/kernels.hpp"

namespace forster::simd::scalar {

void susceptibility(const SusceptibilityArgs& a, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im) {
  const std::size_t n = z.size();
  for (std::size_t k = 0; k < n; ++k) {
    double chi_re = a.eit_re;
    double chi_im = a.eit_im;
    if (a.has_gate) {
      const double dz = z[k] - a.gate_z;
      double d2 = a.transverse2 + dz * dz;
      if (d2 < a.r_min2) d2 = a.r_min2;
      const double inv_r6 = 1.0 / (d2 * d2 * d2);
      const double vr = a.c6_re * inv_r6;
      const double vi = a.c6_im * inv_r6;
      // V / (Omega^2 - i gamma V) = [vr Omega^2 + i (gamma |V|^2 + vi Omega^2)] / [(Omega^2 + gamma vi)^2 + (gamma vr)^2]
      const double v2 = vr * vr + vi * vi;
      const double num_re = vr * a.omega2;
      const double num_im = a.gamma * v2 + vi * a.omega2;
      const double den_a = a.omega2 + a.gamma * vi;
      const double den_b = a.gamma * vr;
      const double scale = a.g2 / (den_a * den_a + den_b * den_b);
      chi_re = chi_re + num_re * scale;
      chi_im = chi_im + num_im * scale;
    }
    re[k] = density[k] * chi_re;
    im[k] = density[k] * chi_im;
  }
}

void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im) {
  const std::size_t n = a_re.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = weight * a_re[i];
    const double xi = weight * a_im[i];
    double* row_re = acc_re.data() + i * n;
    double* row_im = acc_im.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      // (xr + i xi)(yr - i yi)
      const double yr = a_re[j];
      const double yi = a_im[j];
      row_re[j] = row_re[j] + (xr * yr + xi * yi);
      row_im[j] = row_im[j] + (xi * yr - xr * yi);
    }
  }
}

}  // namespace forster::simd::scalar
