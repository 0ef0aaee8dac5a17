#include <doctest.h>

#include "forster/atomic_states.hpp"
#include "forster/errors.hpp"
#include "forster/presets.hpp"
#include "forster/units.hpp"

using namespace forster;

TEST_SUITE("atomic_states") {
  TEST_CASE("level labels and invariants") {
    const auto p = RydbergLevel::make(49, Orbital::P, 1.5, -0.5);
    CHECK(p.twice_j == 3);
    CHECK(p.twice_mj == -1);
    CHECK(p.label() == "49P3/2(mj=-1/2)");
    CHECK_THROWS_AS(RydbergLevel::make(50, Orbital::S, 1.5, 0.5), DomainError);
    CHECK_THROWS_AS(RydbergLevel::make(50, Orbital::P, 0.5, 1.5), DomainError);
    CHECK_THROWS_AS(RydbergLevel::make(0, Orbital::S, 0.5, 0.5), DomainError);
  }

  TEST_CASE("Lande factors") {
    CHECK(RydbergLevel::make(50, Orbital::S, 0.5, 0.5).lande_g() == doctest::Approx(2.0));
    CHECK(RydbergLevel::make(50, Orbital::P, 0.5, 0.5).lande_g() == doctest::Approx(2.0 / 3.0));
    CHECK(RydbergLevel::make(50, Orbital::P, 1.5, 0.5).lande_g() == doctest::Approx(4.0 / 3.0));
  }

  TEST_CASE("quadratic defect model") {
    PairChannel ch;
    ch.defect_zero_field = 100.0;
    ch.diff_polarizability = 4.0;
    CHECK(forster_defect(ch, 5.0) == doctest::Approx(0.0));
    ch.zeeman_shift = 3.0;
    CHECK(forster_defect(ch, 0.0) == doctest::Approx(103.0));
    CHECK(forster_defect(ch, 2.0) == doctest::Approx(forster_defect(ch, -2.0)));
  }

  TEST_CASE("50S/48S has one resonance at 0.710 V/cm") {
    const auto preset = load_pair_preset("rb87_50s48s");
    const auto roots = resonance_fields(preset.pair, 1.0);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].field == doctest::Approx(0.710).epsilon(1e-4));
    CHECK(std::abs(forster_defect(channel_set(preset.pair)[0], roots[0].field)) < 1e-6);
  }

  TEST_CASE("66S/64S has four resonances below 0.25 V/cm") {
    const auto preset = load_pair_preset("rb87_66s64s");
    const auto roots = resonance_fields(preset.pair, 0.25);
    REQUIRE(roots.size() == 4);
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) CHECK(roots[i].field < roots[i + 1].field);
    CHECK(roots.back().field < 0.25);
  }

  TEST_CASE("no crossing when every defect stays negative") {
    PairConfig cfg;
    cfg.gate_s = RydbergLevel::make(50, Orbital::S, 0.5, 0.5);
    cfg.source_s = RydbergLevel::make(48, Orbital::S, 0.5, 0.5);
    PairChannel ch;
    ch.gate_state = RydbergLevel::make(49, Orbital::P, 0.5, 0.5);
    ch.source_state = RydbergLevel::make(48, Orbital::P, 0.5, 0.5);
    ch.defect_zero_field = -angular(10.0);
    ch.diff_polarizability = angular(50.0);
    cfg.channels = {ch, ch};
    CHECK(resonance_fields(cfg, 5.0).empty());
  }

  TEST_CASE("selection rules") {
    PairConfig cfg;
    cfg.gate_s = RydbergLevel::make(66, Orbital::S, 0.5, 0.5);
    cfg.source_s = RydbergLevel::make(64, Orbital::S, 0.5, 0.5);
    PairChannel keep;
    keep.gate_state = RydbergLevel::make(65, Orbital::P, 0.5, -0.5);
    keep.source_state = RydbergLevel::make(64, Orbital::P, 1.5, 1.5);
    PairChannel drop = keep;
    drop.source_state = RydbergLevel::make(64, Orbital::P, 1.5, 0.5);
    cfg.channels = {keep, drop};
    CHECK(channel_set(cfg).size() == 1);
    cfg.theta = 0.3;
    CHECK(channel_set(cfg).size() == 2);

    PairChannel bad = keep;
    bad.gate_state = RydbergLevel::make(65, Orbital::S, 0.5, 0.5);
    cfg.channels = {bad};
    CHECK_THROWS_AS(channel_set(cfg), DomainError);
    bad = keep;
    bad.source_state = RydbergLevel::make(64, Orbital::P, 1.5, -1.5);  // |delta m_j| = 2
    cfg.channels = {bad};
    CHECK_THROWS_AS(check_dipole_selection(cfg, bad), DomainError);
  }

  TEST_CASE("Zeeman shift of the P pair") {
    PairConfig cfg;
    cfg.gate_s = RydbergLevel::make(66, Orbital::S, 0.5, 0.5);
    cfg.source_s = RydbergLevel::make(64, Orbital::S, 0.5, 0.5);
    PairChannel ch;
    ch.gate_state = RydbergLevel::make(65, Orbital::P, 0.5, 0.5);
    ch.source_state = RydbergLevel::make(64, Orbital::P, 1.5, 0.5);
    // (2/3 * 1/2 + 4/3 * 1/2) - (2 * 1/2 + 2 * 1/2) = -1 in units of mu_B B.
    CHECK(pair_zeeman_shift(cfg.gate_s, cfg.source_s, ch, 1.0) == doctest::Approx(-angular(1.39962)).epsilon(1e-4));
  }
}
