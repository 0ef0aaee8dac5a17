#include <doctest.h>

#include <random>
#include <vector>

#include "forster/simd/kernels.hpp"

using namespace forster;

namespace {

simd::SusceptibilityArgs random_args(std::mt19937_64& rng, bool gate) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  simd::SusceptibilityArgs a;
  a.eit_re = u(rng);
  a.eit_im = u(rng);
  a.g2 = 100.0 * u(rng);
  a.omega2 = 500.0 * u(rng) + 1.0;
  a.gamma = 20.0 * u(rng);
  a.c6_re = 1e5 * (u(rng) - 0.5);
  a.c6_im = 1e5 * u(rng);
  a.gate_z = 10.0 * (u(rng) - 0.5);
  a.transverse2 = 4.0 * u(rng);
  a.r_min2 = 0.25;
  a.has_gate = gate;
  return a;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("susceptibility kernels agree bit for bit") {
    if (!simd::isa_available(simd::Isa::Avx2)) {
      MESSAGE("AVX2 not available; only the scalar kernel is exercised");
      return;
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto args = random_args(rng, trial % 3 != 0);
      const std::size_t n = 1 + trial % 15;  // exercises every remainder length
      std::vector<double> z(n), dens(n);
      for (std::size_t k = 0; k < n; ++k) {
        z[k] = u(rng);
        dens[k] = 0.5 + 0.02 * u(rng);
      }
      if (trial % 7 == 0) z[0] = args.gate_z;  // inside the regularization radius
      std::vector<double> re_s(n), im_s(n), re_v(n), im_v(n);
      simd::scalar::susceptibility(args, z, dens, re_s, im_s);
      simd::avx2::susceptibility(args, z, dens, re_v, im_v);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(re_s[k] == re_v[k]);
        CHECK(im_s[k] == im_v[k]);
      }
    }
  }

  TEST_CASE("outer product kernels agree bit for bit") {
    if (!simd::isa_available(simd::Isa::Avx2)) return;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 33u}) {
      std::vector<double> are(n), aim(n);
      for (std::size_t k = 0; k < n; ++k) {
        are[k] = nd(rng);
        aim[k] = nd(rng);
      }
      std::vector<double> sre(n * n, 0.25), sim(n * n, -0.5);
      auto vre = sre;
      auto vim = sim;
      simd::scalar::accumulate_outer(are, aim, 0.3, sre, sim);
      simd::avx2::accumulate_outer(are, aim, 0.3, vre, vim);
      CHECK(sre == vre);
      CHECK(sim == vim);
    }
  }

  TEST_CASE("outer product matches the definition") {
    const std::vector<double> are{1.0, 2.0}, aim{0.5, -1.0};
    std::vector<double> re(4, 0.0), im(4, 0.0);
    simd::accumulate_outer(are, aim, 2.0, re, im);
    // a0 conj(a1) = (1 + 0.5i)(2 + i) = 1.5 + 2i
    CHECK(re[1] == doctest::Approx(3.0));
    CHECK(im[1] == doctest::Approx(4.0));
    CHECK(im[0] == doctest::Approx(0.0));
  }

  TEST_CASE("dispatch override") {
    simd::set_isa_override(simd::Isa::Scalar);
    CHECK(simd::active_isa() == simd::Isa::Scalar);
    CHECK(simd::isa_name(simd::Isa::Scalar) == "scalar");
    simd::set_isa_override(std::nullopt);
    if (!simd::isa_available(simd::Isa::Avx2)) CHECK_THROWS(simd::set_isa_override(simd::Isa::Avx2));
  }
}
