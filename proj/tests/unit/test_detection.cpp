#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "forster/detection.hpp"
#include "forster/errors.hpp"
#include "forster/presets.hpp"
#include "forster/units.hpp"

using namespace forster;

namespace {

std::vector<double> pmf(double mu, std::size_t n) {
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
  return out;
}

// Exact fidelity from the Poisson CDFs, P(X <= k) = Q(k + 1, mu).
double exact_fidelity(double mu_present, double mu_absent) {
  double best = 0.5;
  for (int t = 1; t < 200; ++t) {
    const double hit = boost::math::gamma_q(static_cast<double>(t), mu_present);       // P(present < t)
    const double reject = boost::math::gamma_p(static_cast<double>(t), mu_absent);     // P(absent >= t)
    best = std::max(best, std::min(hit, reject));
  }
  return best;
}

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("exact Poisson fidelity against the incomplete gamma oracle") {
    for (auto [mp, ma] : {std::pair{5.0, 20.0}, {1.5, 5.5}, {0.7, 2.7}, {10.0, 12.0}}) {
      const auto r = detection_fidelity(pmf(mp, 150), pmf(ma, 150));
      CHECK(r.fidelity == doctest::Approx(exact_fidelity(mp, ma)).epsilon(1e-10));
    }
  }

  TEST_CASE("Monte Carlo fidelity within three standard errors of the exact value") {
    CountModel m;
    m.mean_no_excitation = 20.0;
    m.mean_with_excitation = 5.0;
    m.p_excitation = 1.0;
    const std::size_t shots = 40000;
    const auto h = count_histograms(m, shots, 99);
    const auto mc = detection_fidelity(h.gate_pulse, h.no_gate_pulse);
    const double exact = exact_fidelity(5.0, 20.0);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(shots));
    CHECK(std::abs(mc.fidelity - exact) < 3.0 * se);
  }

  TEST_CASE("fidelity bounds") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> a(12), b(12);
      for (auto& x : a) x = u(rng);
      for (auto& x : b) x = u(rng);
      const auto r = detection_fidelity(a, b);
      CHECK(r.fidelity >= 0.5);
      CHECK(r.fidelity <= 1.0);
    }
    const std::vector<double> same{1.0, 4.0, 2.0, 0.5};
    const auto s = detection_fidelity(same, same);
    CHECK(s.fidelity == 0.5);
    CHECK(s.chance_level);
    const std::vector<double> low{3.0, 5.0, 0.0, 0.0}, high{0.0, 0.0, 2.0, 7.0};
    const auto d = detection_fidelity(low, high);
    CHECK(d.fidelity == 1.0);
    CHECK(d.threshold == 2);
  }

  TEST_CASE("weighted accuracy") {
    const auto r = weighted_detection_fidelity(pmf(2.0, 60), pmf(8.0, 60), 0.3);
    CHECK(r.weighted_accuracy >= 0.7);  // never worse than always answering "absent"
    CHECK(r.weighted_accuracy <= 1.0);
  }

  TEST_CASE("histogram separation recovers the components") {
    const double p = 0.45, mu0 = 6.0, mu1 = 1.5, n = 1e6;
    const auto a = pmf(mu0, 80), b = pmf(mu1, 80);
    std::vector<double> gate(81);
    for (std::size_t k = 0; k <= 80; ++k) gate[k] = n * ((1.0 - p) * a[k] + p * b[k]);
    const auto sep = separate_histograms(gate, p, mu0);
    for (std::size_t k = 0; k <= 20; ++k) {
      CHECK(sep.present[k] == doctest::Approx(n * p * b[k]).epsilon(1e-9));
      CHECK(sep.absent[k] == doctest::Approx(n * (1.0 - p) * a[k]).epsilon(1e-9));
    }
    CHECK(sep.warnings.empty());

    std::vector<double> same(81);
    for (std::size_t k = 0; k <= 80; ++k) same[k] = n * a[k];
    const auto flat = separate_histograms(same, p, mu0);
    CHECK_FALSE(flat.warnings.empty());
  }

  TEST_CASE("shot simulation is seed deterministic and thread independent") {
    CountModel m;
    m.mean_no_excitation = 4.0;
    m.mean_with_excitation = 1.0;
    m.p_excitation = 0.4;
    m.present_means = {0.5, 1.0, 1.5};
    const auto a = count_histograms(m, 150000, 5, 1);
    const auto b = count_histograms(m, 150000, 5, 3);
    CHECK(a.gate_pulse == b.gate_pulse);
    CHECK(a.no_gate_pulse == b.no_gate_pulse);
    double total = 0.0;
    for (double x : a.gate_pulse) total += x;
    CHECK(total == 150000.0);
  }

  TEST_CASE("count model validation and mixture") {
    CountModel m;
    m.mean_no_excitation = 1.0;
    m.mean_with_excitation = 2.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m.mean_with_excitation = 0.5;
    m.present_means = {0.2, 0.8};
    const auto mix = m.present_pmf(40);
    const auto a = pmf(0.2, 40), b = pmf(0.8, 40);
    for (std::size_t k = 0; k < 10; ++k) CHECK(mix[k] == doctest::Approx(0.5 * (a[k] + b[k])));
  }

  TEST_CASE("fidelity scan peaks on resonance") {
    ExperimentModel model;
    model.propagation.gamma = angular(3.03);
    model.propagation.omega_rabi = angular(5.0);
    model.propagation.gamma_s = angular(0.05);
    model.propagation.density = model.geometry.density();
    model.propagation.g = model.geometry.coupling(model.propagation.gamma);
    model.interaction = load_pair_preset("rb87_50s48s").interaction();
    FidelityOptions o;
    o.gate_samples = 12;
    o.beam_samples = 24;
    o.resolution_nodes = 2;
    const std::vector<double> fields{0.0, 0.71};
    const std::vector<double> rates{1.0};
    const auto pts = fidelity_scan(model, fields, rates, PhotonStats{}, o);
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].fidelity > pts[0].fidelity);
    CHECK(pts[1].mu1 < pts[1].mu0);
  }
}
