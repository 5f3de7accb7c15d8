#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agmonlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace agmonlab;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("scenario config parsing") {
    const json good = {{"scenario", "strip"},
                       {"params", {{"eps", 0.05}}},
                       {"grid", {{"extent", {{-1.0, 9.0}, {-2.0, 2.0}}}, {"n", {101, 41}}}},
                       {"lambda", 0.0},
                       {"delta", 0.1}};
    const Scenario s = scenario_from_json(good);
    CHECK(s.name == "strip");
    CHECK(s.potential.params.at("eps") == 0.05);
    CHECK(s.grid.n[0] == 101);
    CHECK(s.grid.origin[0] == doctest::Approx(-1.0));
    CHECK_FALSE(s.eigensolve);
    CHECK(s.delta == 0.1);

    const json eig = {{"scenario", "four_squares"}, {"lambda", "eigensolve"}};
    CHECK(scenario_from_json(eig).eigensolve);

    CHECK_THROWS_AS(scenario_from_json(json{{"params", json::object()}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(json{{"scenario", "nope"}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(json{{"scenario", "strip"}, {"bogus", 1}}),
                    ConfigError);
    CHECK_THROWS_AS(scenario_from_json(json{{"scenario", "strip"}, {"lambda", "best"}}),
                    ConfigError);
    CHECK_THROWS_AS(scenario_from_json(json{{"scenario", "strip"}, {"delta", -1.0}}),
                    ConfigError);
    CHECK_THROWS_AS(
        scenario_from_json(json{{"scenario", "strip"},
                                {"grid", {{"extent", {{0.0, 1.0}}}, {"n", {2}}}}}),
        ConfigError);
}

TEST_CASE("scenario json round trip") {
    const Scenario s = scenario_by_name("champagne", {{"bubbles", 32}});
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(back.name == s.name);
    CHECK(back.grid.n[0] == s.grid.n[0]);
    CHECK(back.potential.params.at("bubbles") == 32);
    CHECK(back.eigensolve == s.eigensolve);
}

TEST_CASE("alpha grid specs") {
    const auto lin = parse_alpha_grid("1:3:5");
    REQUIRE(lin.size() == 5);
    CHECK(lin[1] == doctest::Approx(1.5));
    const auto lg = parse_alpha_grid("0.5:8:4log");
    REQUIRE(lg.size() == 4);
    CHECK(lg[1] / lg[0] == doctest::Approx(lg[3] / lg[2]).epsilon(1e-12));
    CHECK_THROWS_AS(parse_alpha_grid("nonsense"), ConfigError);
    CHECK_THROWS_AS(parse_alpha_grid("3:1:5"), ConfigError);
    CHECK_THROWS_AS(parse_alpha_grid("1:3:5exp"), ConfigError);
}

TEST_CASE("csv writer is deterministic") {
    RunConfig cfg;
    cfg.scenario = scenario_by_name("radial_shell", {});
    cfg.seed = 7;
    const auto prov = provenance_lines(cfg);
    const std::vector<std::string> cols{"x", "value"};
    const std::vector<std::vector<double>> rows{{0.1, 1.0 / 3.0}, {0.2, 2.5e-17}};
    write_csv("/tmp/agmonlab_csv_a.csv", prov, cols, rows);
    write_csv("/tmp/agmonlab_csv_b.csv", prov, cols, rows);
    const std::string a = slurp("/tmp/agmonlab_csv_a.csv");
    CHECK(a == slurp("/tmp/agmonlab_csv_b.csv"));
    CHECK(a.find("# ") == 0);
    CHECK(a.find("x,value") != std::string::npos);
    // full round-trip precision
    CHECK(a.find("0.33333333333333331") != std::string::npos);
    std::remove("/tmp/agmonlab_csv_a.csv");
    std::remove("/tmp/agmonlab_csv_b.csv");
}
