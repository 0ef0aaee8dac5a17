#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "forster/errors.hpp"
#include "forster/propagation.hpp"
#include "forster/units.hpp"

using namespace forster;

namespace {

PropagationParams base(DensityProfile density, double od) {
  PropagationParams p;
  p.omega_rabi = angular(5.0);
  p.gamma = angular(3.03);
  p.gamma_s = angular(0.05);
  p.density = density;
  p.g = coupling_for_optical_depth(od, p.gamma, p.density);
  return p;
}

// Independent reference: composite Simpson rule of the adiabatic susceptibility on a fine grid.
std::complex<double> simpson_exponent(const PropagationParams& p, Point2 line, const GateExcitation& gate, int n) {
  const double a = p.density.z_min();
  const double b = p.density.z_max();
  const double h = (b - a) / n;
  const std::complex<double> i{0.0, 1.0};
  const auto chi = [&](double z) {
    const double dx = line.x - gate.position.x;
    const double dy = line.y - gate.position.y;
    const double dz = z - gate.position.z;
    const double d2 = std::max(dx * dx + dy * dy + dz * dz, p.r_min * p.r_min);
    const auto v = gate.coefficient / (d2 * d2 * d2);
    const double n_at = p.density.longitudinal(z) * p.density.transverse(line.norm());
    const double om2 = p.omega_rabi * p.omega_rabi;
    return n_at * (p.g * p.g * (p.omega + i * p.gamma_s) / om2 + p.g * p.g * v / (om2 - i * p.gamma * v));
  };
  std::complex<double> sum = chi(a) + chi(b);
  for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * chi(a + k * h);
  return sum * h / 3.0 / p.c;
}

}  // namespace

TEST_SUITE("propagation") {
  TEST_CASE("EIT baseline for uniform density") {
    for (double od : {1.0, 8.0, 30.0}) {
      const auto p = base(DensityProfile::uniform(25.0), od);
      const double expect = std::exp(-2.0 * p.g * p.g * p.gamma_s * p.density.effective_length() /
                                     (p.c * p.omega_rabi * p.omega_rabi));
      const auto t = eit_baseline(p);
      CHECK(std::abs(t.intensity / expect - 1.0) < 1e-6);
      CHECK(t.scatter_probability == doctest::Approx(1.0 - t.intensity));
    }
  }

  TEST_CASE("deep blockade gives two-level absorption") {
    for (auto form : {SusceptibilityForm::Adiabatic, SusceptibilityForm::Full}) {
      auto p = base(DensityProfile::uniform(10.0), 4.0);
      p.gamma_s = 0.0;
      p.form = form;
      const GateExcitation gate{{0.0, 0.0, 0.0}, {0.0, 1e12}};
      const auto t = transmission_freq({}, gate, p);
      CHECK(std::abs(t.intensity / std::exp(-p.optical_depth()) - 1.0) < 0.01);
    }
  }

  TEST_CASE("quadrature against a fine Simpson reference") {
    auto p = base(DensityProfile::gaussian(15.0), 12.0);
    p.omega = angular(0.02);
    const GateExcitation gate{{1.0, -0.5, 3.0}, {angular(6000.0), angular(50.0)}};
    const Point2 line{2.0, 1.0};
    const auto t = transmission_freq(line, gate, p);
    const auto ref = std::exp(std::complex<double>(0.0, 1.0) * simpson_exponent(p, line, gate, 400000));
    CHECK(std::abs(t.amplitude - ref) < 1e-6);
  }

  TEST_CASE("adiabatic and full forms agree for small rates") {
    auto p = base(DensityProfile::gaussian(15.0), 10.0);
    p.gamma_s = angular(0.001);
    const GateExcitation gate{{0.0, 0.0, 0.0}, {angular(3000.0), 0.0}};
    const double a = transmission_freq({1.0, 0.0}, gate, p).intensity;
    p.form = SusceptibilityForm::Full;
    const double f = transmission_freq({1.0, 0.0}, gate, p).intensity;
    CHECK(std::abs(a - f) < 1e-3);
  }

  TEST_CASE("field profile ends at the transmission") {
    const auto p = base(DensityProfile::gaussian(10.0), 6.0);
    const GateExcitation gate{{0.0, 0.0, 2.0}, {0.0, angular(1e4)}};
    std::vector<double> nodes{p.density.z_min(), -10.0, 0.0, 2.0, 10.0, p.density.z_max()};
    const auto e = field_profile({}, gate, p, nodes);
    REQUIRE(e.size() == nodes.size());
    CHECK(e.front() == std::complex<double>(1.0, 0.0));
    CHECK(std::abs(e.back() - transmission_freq({}, gate, p).amplitude) < 1e-9);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) CHECK(std::norm(e[k + 1]) <= std::norm(e[k]) + 1e-12);
    std::vector<double> unsorted{1.0, 0.0};
    CHECK_THROWS_AS(field_profile({}, gate, p, unsorted), DomainError);
  }

  TEST_CASE("susceptibility at the gate is rejected") {
    const auto p = base(DensityProfile::gaussian(10.0), 6.0);
    const GateExcitation gate{{0.0, 0.0, 1.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(susceptibility(1.0, {}, gate, p), DomainError);
    CHECK_NOTHROW(susceptibility(1.5, {}, gate, p));
  }

  TEST_CASE("optical depth round trip and validation") {
    const auto density = DensityProfile::gaussian(40.0, 10.0);
    const double g = coupling_for_optical_depth(18.5, angular(3.03), density);
    PropagationParams p = base(density, 1.0);
    p.g = g;
    CHECK(p.optical_depth() == doctest::Approx(18.5));
    CHECK(density.effective_length() == doctest::Approx(std::sqrt(kPi) * 40.0).epsilon(1e-9));
    p.omega_rabi = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
  }

  TEST_CASE("validity warnings") {
    auto p = base(DensityProfile::gaussian(10.0), 6.0);
    CHECK(validity_warnings(p, angular(0.1)).empty());
    p.gamma_s = angular(1.0);
    CHECK(validity_warnings(p, angular(0.1)).size() == 1);
  }
}
