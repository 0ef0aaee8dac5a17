#include <doctest.h>

#include <cmath>

#include "forster/errors.hpp"
#include "forster/time_domain.hpp"
#include "forster/units.hpp"

using namespace forster;

namespace {

PropagationParams short_cloud() {
  PropagationParams p;
  p.omega_rabi = angular(5.0);
  p.gamma = angular(3.03);
  p.gamma_s = angular(0.02);
  p.density = DensityProfile::gaussian(6.0);
  p.density.cutoff = 3.0;
  p.g = coupling_for_optical_depth(8.0, p.gamma, p.density);
  p.form = SusceptibilityForm::Full;
  return p;
}

}  // namespace

TEST_SUITE("time_domain") {
  TEST_CASE("steady state without gate matches the frequency domain") {
    auto p = short_cloud();
    p.omega = angular(0.05);
    const auto t = transmission_time_oracle(p, std::nullopt, {});
    const auto f = transmission_freq({}, std::nullopt, p);
    CHECK(std::abs(t.transmission.intensity - f.intensity) < 1e-4);
    CHECK(std::abs(t.transmission.amplitude - f.amplitude) < 1e-3);
    CHECK(t.courant == doctest::Approx(1.0));
  }

  TEST_CASE("steady state with a resolved gate matches the frequency domain") {
    const auto p = short_cloud();
    ResolvedGate gate{{0.0, 0.0, 1.0}, {{angular(300.0), angular(15.0)}}, angular(0.02)};
    const Point2 line{1.5, 0.0};
    const auto t = transmission_time_oracle(p, gate, line);
    const auto f = transmission_freq(line, gate.excitation(p.omega), p);
    CHECK(f.intensity < 0.9);  // the gate matters
    CHECK(std::abs(t.transmission.intensity - f.intensity) < 2e-3);
  }

  TEST_CASE("two resolved channels act through the summed coefficient") {
    const auto p = short_cloud();
    ResolvedGate gate{{0.0, 0.0, -1.0}, {{angular(200.0), angular(10.0)}, {angular(150.0), angular(-25.0)}}, 0.0};
    const auto c = gate.coefficient(0.0);
    const double expect = angular(200.0) * angular(200.0) / angular(10.0) +
                          angular(150.0) * angular(150.0) / angular(-25.0);
    CHECK(c.real() == doctest::Approx(expect));
    const auto t = transmission_time_oracle(p, gate, {2.0, 0.0});
    const auto f = transmission_freq({2.0, 0.0}, gate.excitation(0.0), p);
    CHECK(std::abs(t.transmission.intensity - f.intensity) < 2e-3);
  }

  TEST_CASE("refining the grid converges") {
    const auto p = short_cloud();
    ResolvedGate gate{{0.0, 0.0, 0.0}, {{angular(300.0), angular(15.0)}}, angular(0.02)};
    OracleSettings coarse;
    coarse.dz = 0.1;
    OracleSettings fine;
    fine.dz = 0.05;
    const double f = transmission_freq({1.0, 0.0}, gate.excitation(0.0), p).intensity;
    const double ec = std::abs(transmission_time_oracle(p, gate, {1.0, 0.0}, coarse).transmission.intensity - f);
    const double ef = std::abs(transmission_time_oracle(p, gate, {1.0, 0.0}, fine).transmission.intensity - f);
    CHECK(ef <= ec + 1e-6);
  }

  TEST_CASE("invalid steps are rejected") {
    const auto p = short_cloud();
    OracleSettings s;
    s.dt = 2.0 * s.dz / s.light_speed;
    CHECK_THROWS_AS(transmission_time_oracle(p, std::nullopt, {}, s), ConfigError);
    s = {};
    s.dz = -1.0;
    CHECK_THROWS_AS(transmission_time_oracle(p, std::nullopt, {}, s), ConfigError);
    s = {};
    s.max_time = 0.5;
    CHECK_THROWS_AS(transmission_time_oracle(p, std::nullopt, {}, s), NumericalError);
  }
}
