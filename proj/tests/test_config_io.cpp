#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpath/config.hpp"
#include "qpath/result_table.hpp"

using Catch::Approx;
using namespace qpath;

TEST_CASE("KeyValueConfig: parsing, comments, overrides") {
    const auto kv = KeyValueConfig::parse(
        "# a comment\n"
        "mode = oracle-validation\n"
        "\n"
        "constants.hbar = 1.5\n"
        "constants.hbar = 2.5\n");
    CHECK(kv.get("mode") == "oracle-validation");
    CHECK(kv.get("constants.hbar") == "2.5");  // last assignment wins
    CHECK(kv.has("mode"));
    CHECK_FALSE(kv.has("missing"));
    CHECK_THROWS_AS(kv.get("missing"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("just some words\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("= no key\n"), ConfigError);
}

TEST_CASE("ExperimentConfig: minimal nonselective-dimension config") {
    const auto kv = KeyValueConfig::parse(
        "mode = nonselective-dimension\n"
        "schedule.dx_max = 1000\n"
        "schedule.dx_min = 1\n"
        "schedule.n_points = 13\n"
        "schedule.b_scale = 0.5\n"
        "schedule.T = 1e6\n"
        "measurement.D = inf, 1e-6\n");
    const ExperimentConfig cfg = ExperimentConfig::from_key_values(kv);
    CHECK(cfg.mode == ExperimentMode::NonselectiveDimension);
    REQUIRE(cfg.dx_values.size() == 13);
    CHECK(cfg.dx_values.front() == Approx(1000.0));
    REQUIRE(cfg.d_values.size() == 2);
    CHECK(std::isinf(cfg.d_values[0]));
    CHECK(cfg.d_values[1] == Approx(1e-6));
}

TEST_CASE("ExperimentConfig: rejection diagnostics") {
    auto parse = [](const std::string& text) {
        return ExperimentConfig::from_key_values(KeyValueConfig::parse(text));
    };
    CHECK_THROWS_AS(parse("constants.hbar = 1\n"), ConfigError);    // no mode
    CHECK_THROWS_AS(parse("mode = sideways\n"), ConfigError);       // bad mode
    CHECK_THROWS_AS(parse("mode = oracle-validation\nnot.a.key = 1\n"), ConfigError);
    // inconsistent (sigma, tau, D) triple
    CHECK_THROWS_AS(parse("mode = nonselective-dimension\n"
                          "schedule.dx = 10, 5, 1\nschedule.T = 100\n"
                          "measurement.sigma = 2\nmeasurement.tau = 1\nmeasurement.D = 3\n"),
                    ConfigError);
    // consistent triple accepted
    CHECK_NOTHROW(parse("mode = nonselective-dimension\n"
                        "schedule.dx = 10, 5, 1\nschedule.T = 100\n"
                        "measurement.sigma = 2\nmeasurement.tau = 1\nmeasurement.D = 2\n"));
    // feedback consistency D = 2 hbar t_c^2 / m
    const std::string fb_base =
        "mode = feedback-relaxation\nfeedback.t_c = 1\nmeasurement.tau = 0.02\n"
        "run.t_max = 2\nstate.a = 1\n";
    CHECK_NOTHROW(parse(fb_base));
    CHECK_THROWS_AS(parse(fb_base + "measurement.D = 1.5\n"), ConfigError);
    CHECK_NOTHROW(parse(fb_base + "measurement.D = 1.5\nfeedback.override_consistency = true\n"));
    CHECK_THROWS_AS(parse(fb_base + "measurement.D = inf\nfeedback.override_consistency = true\n"),
                    ConfigError);  // divergent feedback kicks
    // state.delta is derived in dimension modes
    CHECK_THROWS_AS(parse("mode = nonselective-dimension\nstate.delta = 1\n"
                          "schedule.dx = 10, 5, 1\nschedule.T = 100\nmeasurement.D = 1\n"),
                    ConfigError);
    // selective mode requires the control ratio and derives the meter
    CHECK_THROWS_AS(parse("mode = selective-dimension\nschedule.dx = 10, 5, 1\nschedule.T = 1000\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse("mode = selective-dimension\nschedule.dx = 10, 5, 1\nschedule.T = 1000\n"
                          "feedback.t_c_over_tau = 1\nmeasurement.D = 2\n"),
                    ConfigError);
    CHECK_NOTHROW(parse("mode = selective-dimension\nschedule.dx = 10, 5, 1\nschedule.T = 1000\n"
                        "feedback.t_c_over_tau = 1\n"));
    CHECK_THROWS_AS(parse("mode = oracle-validation\noutput.formats = xml\n"), ConfigError);
}

TEST_CASE("ExperimentConfig: echo round-trips to the identical configuration") {
    const auto kv = KeyValueConfig::parse(
        "mode = feedback-relaxation\n"
        "feedback.t_c = 1\n"
        "measurement.tau = 0.005\n"
        "run.t_max = 10\n"
        "state.a = 1\n"
        "ensemble.n_traj = 50\n"
        "ensemble.master_seed = 777\n");
    const ExperimentConfig cfg = ExperimentConfig::from_key_values(kv);
    const ExperimentConfig again = ExperimentConfig::from_key_values(cfg.echo());
    CHECK(cfg.echo().to_string() == again.echo().to_string());
    CHECK(again.sigma == Approx(2.0 / 0.005));  // derived sigma = D / tau survives
}

TEST_CASE("format_double: 17 significant digits round-trip") {
    for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e-6, M_PI, 123456.789012345}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("ResultTable: CSV layout and JSON mirror") {
    ResultTable t;
    t.name = "demo";
    t.meta("run_info.version", "x");
    t.meta("alpha.beta", "2");
    t.columns = {"dx", "l"};
    t.rows = {{1.0, 2.5}, {0.5, 5.0}};

    const std::string csv = to_csv(t);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "# table = demo");
    std::getline(lines, line);
    CHECK(line == "# run_info.version = x");
    std::getline(lines, line);
    CHECK(line == "# alpha.beta = 2");
    std::getline(lines, line);
    CHECK(line == "dx,l");
    std::getline(lines, line);
    CHECK(line == "1,2.5");

    const auto j = to_json(t);
    CHECK(j["table"] == "demo");
    CHECK(j["metadata"]["alpha.beta"] == "2");
    CHECK(j["columns"].size() == 2);
    CHECK(j["rows"].size() == 2);
    CHECK(j["rows"][0][1].get<double>() == 2.5);

    ResultTable inf_table = t;
    inf_table.rows = {{std::numeric_limits<double>::infinity(), 1.0}};
    CHECK(to_json(inf_table)["rows"][0][0].get<std::string>() == "inf");

    // The metadata block parses back into a key/value tree.
    const KeyValueConfig meta = parse_metadata_block(csv);
    CHECK(meta.get("alpha.beta") == "2");
    CHECK(meta.get("table") == "demo");
}
