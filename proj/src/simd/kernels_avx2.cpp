#include <cstddef>

#include "forster/simd/kernels.hpp"

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(FORSTER_NO_AVX2)
#include <immintrin.h>
#define FORSTER_AVX2_TARGET __attribute__((target("avx2")))
#define FORSTER_HAVE_AVX2_KERNELS 1
#else
#define FORSTER_HAVE_AVX2_KERNELS 0
#endif

namespace forster::simd::avx2 {

#if FORSTER_HAVE_AVX2_KERNELS

FORSTER_AVX2_TARGET
void susceptibility(const SusceptibilityArgs& a, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im) {
  const std::size_t n = z.size();
  const std::size_t vec_end = n - n % 4;
  if (!a.has_gate) {
    const __m256d er = _mm256_set1_pd(a.eit_re);
    const __m256d ei = _mm256_set1_pd(a.eit_im);
    for (std::size_t k = 0; k < vec_end; k += 4) {
      const __m256d dn = _mm256_loadu_pd(density.data() + k);
      _mm256_storeu_pd(re.data() + k, _mm256_mul_pd(dn, er));
      _mm256_storeu_pd(im.data() + k, _mm256_mul_pd(dn, ei));
    }
  } else {
    const __m256d er = _mm256_set1_pd(a.eit_re);
    const __m256d ei = _mm256_set1_pd(a.eit_im);
    const __m256d gz = _mm256_set1_pd(a.gate_z);
    const __m256d t2 = _mm256_set1_pd(a.transverse2);
    const __m256d rmin2 = _mm256_set1_pd(a.r_min2);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c6r = _mm256_set1_pd(a.c6_re);
    const __m256d c6i = _mm256_set1_pd(a.c6_im);
    const __m256d om2 = _mm256_set1_pd(a.omega2);
    const __m256d gam = _mm256_set1_pd(a.gamma);
    const __m256d g2 = _mm256_set1_pd(a.g2);
    for (std::size_t k = 0; k < vec_end; k += 4) {
      const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(z.data() + k), gz);
      __m256d d2 = _mm256_add_pd(t2, _mm256_mul_pd(dz, dz));
      // max(d2, r_min2) with the same NaN-free semantics as the scalar branch
      d2 = _mm256_blendv_pd(d2, rmin2, _mm256_cmp_pd(d2, rmin2, _CMP_LT_OQ));
      const __m256d inv_r6 = _mm256_div_pd(one, _mm256_mul_pd(_mm256_mul_pd(d2, d2), d2));
      const __m256d vr = _mm256_mul_pd(c6r, inv_r6);
      const __m256d vi = _mm256_mul_pd(c6i, inv_r6);
      const __m256d v2 = _mm256_add_pd(_mm256_mul_pd(vr, vr), _mm256_mul_pd(vi, vi));
      const __m256d num_re = _mm256_mul_pd(vr, om2);
      const __m256d num_im = _mm256_add_pd(_mm256_mul_pd(gam, v2), _mm256_mul_pd(vi, om2));
      const __m256d den_a = _mm256_add_pd(om2, _mm256_mul_pd(gam, vi));
      const __m256d den_b = _mm256_mul_pd(gam, vr);
      const __m256d scale =
          _mm256_div_pd(g2, _mm256_add_pd(_mm256_mul_pd(den_a, den_a), _mm256_mul_pd(den_b, den_b)));
      const __m256d chi_re = _mm256_add_pd(er, _mm256_mul_pd(num_re, scale));
      const __m256d chi_im = _mm256_add_pd(ei, _mm256_mul_pd(num_im, scale));
      const __m256d dn = _mm256_loadu_pd(density.data() + k);
      _mm256_storeu_pd(re.data() + k, _mm256_mul_pd(dn, chi_re));
      _mm256_storeu_pd(im.data() + k, _mm256_mul_pd(dn, chi_im));
    }
  }
  if (vec_end < n)
    scalar::susceptibility(a, z.subspan(vec_end), density.subspan(vec_end), re.subspan(vec_end), im.subspan(vec_end));
}

FORSTER_AVX2_TARGET
void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im) {
  const std::size_t n = a_re.size();
  const std::size_t vec_end = n - n % 4;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr_s = weight * a_re[i];
    const double xi_s = weight * a_im[i];
    const __m256d xr = _mm256_set1_pd(xr_s);
    const __m256d xi = _mm256_set1_pd(xi_s);
    double* row_re = acc_re.data() + i * n;
    double* row_im = acc_im.data() + i * n;
    for (std::size_t j = 0; j < vec_end; j += 4) {
      const __m256d yr = _mm256_loadu_pd(a_re.data() + j);
      const __m256d yi = _mm256_loadu_pd(a_im.data() + j);
      const __m256d pr = _mm256_add_pd(_mm256_mul_pd(xr, yr), _mm256_mul_pd(xi, yi));
      const __m256d pi = _mm256_sub_pd(_mm256_mul_pd(xi, yr), _mm256_mul_pd(xr, yi));
      _mm256_storeu_pd(row_re + j, _mm256_add_pd(_mm256_loadu_pd(row_re + j), pr));
      _mm256_storeu_pd(row_im + j, _mm256_add_pd(_mm256_loadu_pd(row_im + j), pi));
    }
    for (std::size_t j = vec_end; j < n; ++j) {
      const double yr = a_re[j];
      const double yi = a_im[j];
      row_re[j] = row_re[j] + (xr_s * yr + xi_s * yi);
      row_im[j] = row_im[j] + (xi_s * yr - xr_s * yi);
    }
  }
}

#else

void susceptibility(const SusceptibilityArgs& a, std::span<const double> z, std::span<const double> density,
                    std::span<double> re, std::span<double> im) {
  scalar::susceptibility(a, z, density, re, im);
}

void accumulate_outer(std::span<const double> a_re, std::span<const double> a_im, double weight,
                      std::span<double> acc_re, std::span<double> acc_im) {
  scalar::accumulate_outer(a_re, a_im, weight, acc_re, acc_im);
}

#endif

}  // namespace forster::simd::avx2
