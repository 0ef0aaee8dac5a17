#include <doctest.h>

#include <cmath>
#include <string>

#include "forster/config.hpp"
#include "forster/errors.hpp"
#include "forster/experiment.hpp"
#include "forster/units.hpp"

using namespace forster;

TEST_SUITE("config") {
  TEST_CASE("empty input selects the defaults") {
    const auto c = config_from_yaml("", "<empty>");
    CHECK(c.scan == ScanKind::GainScan);
    CHECK(c.preset.pair.name == "rb87_50s48s");
    CHECK(c.stats.storage_efficiency == 0.6);
    CHECK(c.stats.source_rate == 35.0);
    CHECK(c.model.propagation.omega_rabi == doctest::Approx(angular(5.0)));
    CHECK(c.field_grid.size() == 100);
    CHECK(c.field_grid.front() == doctest::Approx(0.6));
    CHECK(c.field_grid.back() == doctest::Approx(0.8));
    CHECK(c.seed == 1);
  }

  TEST_CASE("invariant violations name the key and the bound") {
    CHECK_THROWS_WITH_AS(config_from_yaml("storage_efficiency: 1.3\n", "run.yaml"), doctest::Contains("[0, 1]"),
                         ConfigError);
    CHECK_THROWS_AS(config_from_yaml("samples: -4\n", "run.yaml"), ConfigError);
    CHECK_THROWS_AS(config_from_yaml("omega_rabi_mhz: abc\n", "run.yaml"), ConfigError);
  }

  TEST_CASE("unknown keys report their line") {
    CHECK_THROWS_WITH_AS(config_from_yaml("seed: 3\nbeam_wasit_um: 5\n", "run.yaml"),
                         doctest::Contains("run.yaml:2"), ConfigError);
    CHECK_THROWS_WITH_AS(config_from_yaml("", "run.yaml", {"nope=1"}), doctest::Contains("unknown key 'nope'"),
                         ConfigError);
    CHECK_THROWS_AS(config_from_yaml("", "run.yaml", {"seed"}), ConfigError);
    CHECK_THROWS_AS(config_from_yaml("seed: [1\n", "run.yaml"), ConfigError);
    CHECK_THROWS_AS(config_from_yaml("- 1\n- 2\n", "run.yaml"), ConfigError);
  }

  TEST_CASE("overrides win over the file and MHz keys become angular") {
    const auto c = config_from_yaml("seed: 3\ngamma_mhz: 2.5\n", "run.yaml", {"seed=9", "omega_rabi_mhz=4"});
    CHECK(c.seed == 9);
    CHECK(c.model.propagation.gamma == doctest::Approx(2.0 * kPi * 2.5));
    CHECK(c.model.propagation.omega_rabi == doctest::Approx(2.0 * kPi * 4.0));
    CHECK(c.values["omega_rabi_mhz"].get<double>() == 4.0);
  }

  TEST_CASE("preset values can be overridden") {
    const auto c = config_from_yaml("pair_system: rb87_66s64s\nc3_prime_mhz: 12\n", "run.yaml");
    CHECK(c.preset.pair.name == "rb87_66s64s");
    CHECK(c.model.interaction.c3_prime == doctest::Approx(angular(12.0)));
    CHECK(c.field_grid.back() == doctest::Approx(0.25));
  }

  TEST_CASE("the template is a valid configuration") {
    const auto t = config_template();
    CHECK(t.find("storage_efficiency") != std::string::npos);
    const auto c = config_from_yaml(t, "template");
    CHECK(c.values == config_from_yaml("", "defaults").values);
  }

  TEST_CASE("the echo reproduces the run") {
    const auto a = config_from_yaml("scan: retrieval\nseed: 7\nsource_means: [0, 1.5, 3]\n", "run.yaml");
    const auto echo = config_echo_yaml(a);
    const auto b = config_from_yaml(echo, "echo");
    CHECK(a.values == b.values);
    CHECK(config_echo_yaml(b) == echo);
    CHECK(git_blob_sha1(echo + a.preset.source) == git_blob_sha1(config_echo_yaml(b) + b.preset.source));
  }

  TEST_CASE("presets") {
    for (const auto& name : preset_names()) {
      const auto p = load_pair_preset(name);
      CHECK(p.pair.name == name);
      CHECK_FALSE(p.source.empty());
      CHECK(p.field_window[0] < p.field_window[1]);
    }
    CHECK(load_pair_preset("rb87_66s64s").interaction().channels.size() == 4);
    CHECK_THROWS_AS(load_pair_preset("no_such_preset"), ConfigError);
    CHECK_THROWS_AS(parse_pair_preset("name: x\n  bad: [\n", "bad.yaml"), ConfigError);
    CHECK_THROWS_AS(parse_pair_preset("name: x\nwrong_key: 1\n", "bad.yaml"), ConfigError);
    CHECK_THROWS_AS(parse_scan("gainscan"), ConfigError);
    CHECK(scan_name(parse_scan("oracle-check")) == "oracle-check");
  }
}
