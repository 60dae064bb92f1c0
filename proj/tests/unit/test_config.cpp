#include <doctest.h>

#include "speckle/config.hpp"

using namespace speckle;

TEST_CASE("flat config parses keys, lists and comments") {
    const auto c = Config::parse_string(
        "# comment\n"
        "grid.N=512\n"
        "eps=0.5,0.35,0.25,0.18  # ladder\n"
        "corr.amplitude = 2.0\n"
        "\n");
    CHECK(c.get_long("grid.N") == 512);
    CHECK(c.get_double("corr.amplitude") == 2.0);
    const auto ladder = c.get_double_list("eps");
    REQUIRE(ladder.size() == 4);
    CHECK(ladder[1] == 0.35);
}

TEST_CASE("missing keys are reported by name") {
    const auto c = Config::parse_string("grid.N=16\n");
    CHECK_THROWS_WITH_AS(c.get("probe.times"),
                         "config: missing key 'probe.times'", ConfigError);
}

TEST_CASE("malformed values throw ConfigError") {
    const auto c = Config::parse_string("grid.N=abc\neps=0.5,x\n");
    CHECK_THROWS_AS(c.get_double("grid.N"), ConfigError);
    CHECK_THROWS_AS(c.get_double_list("eps"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("no_equals_sign\n"), ConfigError);
}

TEST_CASE("experiment config defaults and validation") {
    const auto cfg = ExperimentConfig::from(Config::parse_string(""));
    CHECK(cfg.grid_N == 512);
    CHECK(cfg.eps_ladder.size() == 4);
    CHECK(cfg.replicas.size() == 4);

    auto bad = Config::parse_string("eps=1.5\n");
    CHECK_THROWS_AS(ExperimentConfig::from(bad), ConfigError);
    auto bad2 = Config::parse_string("kinetic.method=secret\n");
    CHECK_THROWS_AS(ExperimentConfig::from(bad2), ConfigError);
    auto bad3 = Config::parse_string("eps=0.5,0.3\nreplicas=1,2,3\n");
    CHECK_THROWS_AS(ExperimentConfig::from(bad3), ConfigError);
}

TEST_CASE("config text is kept verbatim for manifests") {
    const std::string text = "grid.N=64\nseed=9\n";
    const auto c = Config::parse_string(text);
    CHECK(c.text() == text);
}
