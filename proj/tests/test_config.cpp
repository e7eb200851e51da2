#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "heatcast/config.hpp"
#include "heatcast/errors.hpp"

using namespace heatcast;
using config::RunConfig;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return config::parse_run_config(in);
}

/// Smallest configuration that passes validate().
RunConfig valid_frame_config() {
    RunConfig c;
    c.train_csv = "train.csv";
    c.test_csv = "test.csv";
    c.out_dir = "out";
    c.input_format = "frame";
    return c;
}

}  // namespace

TEST_CASE("the config grammar skips comments and lets later keys win") {
    const RunConfig cfg = parse(
        "# quantile run\n"
        "\n"
        "train_csv = data/train.csv\n"
        "test_csv = data/test.csv\n"
        "tau = 0.5\n"
        "tau = 0.9   # later assignment overrides\n"
        "  depth =   3\n"
        "alphas = 0.1, 0.3\n");
    CHECK(cfg.train_csv == "data/train.csv");
    CHECK(cfg.test_csv == "data/test.csv");
    CHECK(cfg.tau == 0.9);
    CHECK(cfg.depth == 3);
    CHECK(cfg.alphas == std::vector<double>{0.1, 0.3});
    CHECK(cfg.warnings.empty());
}

TEST_CASE("grammar violations name the offending line") {
    CHECK_THROWS_WITH_AS(parse("tau = 0.9\ndepth 3\n"),
                         "line 2: expected 'key = value', got 'depth 3'", ConfigError);
    CHECK_THROWS_WITH_AS(parse("workers = 4\n"),
                         "unknown configuration key 'workers'", ConfigError);
}

TEST_CASE("every key family reaches its field") {
    RunConfig cfg;

    SUBCASE("paths and format") {
        config::apply_key(cfg, "out_dir", "runs/a");
        CHECK(cfg.out_dir == "runs/a");
        config::apply_key(cfg, "input_format", "frame");
        CHECK(cfg.input_format == "frame");
        CHECK_THROWS_AS(config::apply_key(cfg, "input_format", "parquet"), ConfigError);
    }

    SUBCASE("column remapping and parsing options") {
        config::apply_key(cfg, "col_air_temp", "TEMP");
        config::apply_key(cfg, "col_date", "DATE");
        config::apply_key(cfg, "timestamp_format", "compact_date");
        config::apply_key(cfg, "delimiter", ";");
        config::apply_key(cfg, "missing_sentinels", "NA, -999, ");
        CHECK(cfg.columns.air_temp == "TEMP");
        CHECK(cfg.columns.date == "DATE");
        CHECK(cfg.columns.timestamp_format == "compact_date");
        CHECK(cfg.columns.delimiter == ';');
        CHECK(cfg.columns.missing_sentinels == std::vector<std::string>{"NA", "-999"});
        CHECK_THROWS_AS(config::apply_key(cfg, "delimiter", "ab"), ConfigError);
    }

    SUBCASE("window dates") {
        config::apply_key(cfg, "train_start", "2020-04-01");
        config::apply_key(cfg, "train_end", "2020-09-30");
        REQUIRE(cfg.train_start.has_value());
        CHECK(format_iso_date(*cfg.train_start) == "2020-04-01");
        CHECK(format_iso_date(*cfg.train_end) == "2020-09-30");
        CHECK_THROWS_WITH_AS(config::apply_key(cfg, "test_start", "April 1st"),
                             "key 'test_start' expects an ISO date, got 'April 1st'",
                             ConfigError);
    }

    SUBCASE("model knobs") {
        config::apply_key(cfg, "lag_days", "7");
        config::apply_key(cfg, "shrinkage", "0.05");
        config::apply_key(cfg, "min_node", "9");
        config::apply_key(cfg, "max_trees", "250");
        config::apply_key(cfg, "bag_fraction", "0.8");
        config::apply_key(cfg, "loess_span", "0.5");
        config::apply_key(cfg, "loess_degree", "1");
        config::apply_key(cfg, "qrf_trees", "300");
        config::apply_key(cfg, "qrf_min_node", "11");
        config::apply_key(cfg, "seed", "42");
        CHECK(cfg.lag_days == 7);
        CHECK(cfg.shrinkage == 0.05);
        CHECK(cfg.min_node == 9);
        CHECK(cfg.max_trees == 250);
        CHECK(cfg.bag_fraction == 0.8);
        CHECK(cfg.loess_span == 0.5);
        CHECK(cfg.loess_degree == 1);
        CHECK(cfg.qrf_trees == 300);
        CHECK(cfg.qrf_min_node == 11);
        CHECK(cfg.seed == 42);
        CHECK_THROWS_WITH_AS(config::apply_key(cfg, "tau", "abc"),
                             "key 'tau' expects a number, got 'abc'", ConfigError);
        CHECK_THROWS_WITH_AS(config::apply_key(cfg, "depth", "deep"),
                             "key 'depth' expects an integer, got 'deep'", ConfigError);
    }

    SUBCASE("conformal switches") {
        config::apply_key(cfg, "score_predictor", "observed");
        CHECK(cfg.score_predictor == conformal::ScorePredictor::Observed);
        config::apply_key(cfg, "calibrated_conformal", "yes");
        CHECK(cfg.calibrated_conformal);
        config::apply_key(cfg, "simultaneous", "1");
        CHECK(cfg.simultaneous);
        config::apply_key(cfg, "simultaneous", "false");
        CHECK_FALSE(cfg.simultaneous);
        CHECK_THROWS_WITH_AS(config::apply_key(cfg, "simultaneous", "maybe"),
                             "key 'simultaneous' expects a boolean, got 'maybe'", ConfigError);
    }
}

TEST_CASE("validation enforces the documented ranges") {
    RunConfig cfg = valid_frame_config();
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("required paths") {
        cfg.train_csv.clear();
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("distinct paths") {
        cfg.test_csv = cfg.train_csv;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("station input needs its windows") {
        cfg.input_format = "station";
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.train_start = parse_iso_date("2020-04-01");
        cfg.train_end = parse_iso_date("2020-09-30");
        cfg.test_start = parse_iso_date("2021-04-01");
        cfg.test_end = parse_iso_date("2021-09-30");
        CHECK_NOTHROW(cfg.validate());
        cfg.columns.timestamp_format = "julian";
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("numeric ranges") {
        auto expect_throw = [](RunConfig c) { CHECK_THROWS_AS(c.validate(), ConfigError); };
        RunConfig c = cfg;
        c.lag_days = -1;
        expect_throw(c);
        c = cfg;
        c.tau = 0.0;
        expect_throw(c);
        c = cfg;
        c.tau = 1.0;
        expect_throw(c);
        c = cfg;
        c.shrinkage = 0.0;
        expect_throw(c);
        c = cfg;
        c.depth = -1;
        expect_throw(c);
        c = cfg;
        c.min_node = 0;
        expect_throw(c);
        c = cfg;
        c.qrf_min_node = 0;
        expect_throw(c);
        c = cfg;
        c.max_trees = 0;
        expect_throw(c);
        c = cfg;
        c.bag_fraction = 0.0;
        expect_throw(c);
        c = cfg;
        c.bag_fraction = 1.1;
        expect_throw(c);
        c = cfg;
        c.loess_span = 0.0;
        expect_throw(c);
        c = cfg;
        c.loess_span = 1.2;
        expect_throw(c);
        c = cfg;
        c.loess_degree = 3;
        expect_throw(c);
        c = cfg;
        c.qrf_trees = 0;
        expect_throw(c);
        c = cfg;
        c.alphas.clear();
        expect_throw(c);
        c = cfg;
        c.alphas = {0.1, 1.0};
        expect_throw(c);
    }
}

TEST_CASE("duplicate alpha levels are removed with a warning") {
    RunConfig cfg = valid_frame_config();
    cfg.alphas = {0.1, 0.3, 0.1, 0.3, 0.2};
    cfg.dedupe_alphas();
    CHECK(cfg.alphas == std::vector<double>{0.1, 0.3, 0.2});
    REQUIRE(cfg.warnings.size() == 2);
    CHECK(cfg.warnings[0] == "duplicate alpha level 0.1 removed");
    CHECK(cfg.warnings[1] == "duplicate alpha level 0.3 removed");

    cfg.dedupe_alphas();  // idempotent once unique
    CHECK(cfg.alphas == std::vector<double>{0.1, 0.3, 0.2});
    CHECK(cfg.warnings.size() == 2);
}

TEST_CASE("run configuration survives a JSON round-trip") {
    RunConfig cfg;
    cfg.train_csv = "a.csv";
    cfg.test_csv = "b.csv";
    cfg.out_dir = "out";
    cfg.input_format = "station";
    cfg.columns.air_temp = "TMP";
    cfg.columns.delimiter = ';';
    cfg.columns.timestamp_format = "iso_datetime";
    cfg.columns.missing_sentinels = {"NA", "-99"};
    cfg.train_start = parse_iso_date("2020-04-01");
    cfg.train_end = parse_iso_date("2020-09-30");
    cfg.lag_days = 7;
    cfg.tau = 0.85;
    cfg.shrinkage = 0.02;
    cfg.depth = 2;
    cfg.min_node = 9;
    cfg.max_trees = 123;
    cfg.bag_fraction = 0.75;
    cfg.loess_span = 0.6;
    cfg.loess_degree = 1;
    cfg.qrf_trees = 77;
    cfg.qrf_min_node = 12;
    cfg.alphas = {0.05, 0.2};
    cfg.seed = 987654321;
    cfg.score_predictor = conformal::ScorePredictor::Observed;
    cfg.calibrated_conformal = true;
    cfg.simultaneous = true;

    const RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.train_csv == cfg.train_csv);
    CHECK(back.test_csv == cfg.test_csv);
    CHECK(back.out_dir == cfg.out_dir);
    CHECK(back.input_format == cfg.input_format);
    CHECK(back.columns.air_temp == "TMP");
    CHECK(back.columns.delimiter == ';');
    CHECK(back.columns.timestamp_format == "iso_datetime");
    CHECK(back.columns.missing_sentinels == cfg.columns.missing_sentinels);
    REQUIRE(back.train_start.has_value());
    CHECK(*back.train_start == *cfg.train_start);
    CHECK(*back.train_end == *cfg.train_end);
    CHECK_FALSE(back.test_start.has_value());  // absent dates stay absent
    CHECK(back.lag_days == 7);
    CHECK(back.tau == 0.85);
    CHECK(back.shrinkage == 0.02);
    CHECK(back.depth == 2);
    CHECK(back.min_node == 9);
    CHECK(back.max_trees == 123);
    CHECK(back.bag_fraction == 0.75);
    CHECK(back.loess_span == 0.6);
    CHECK(back.loess_degree == 1);
    CHECK(back.qrf_trees == 77);
    CHECK(back.qrf_min_node == 12);
    CHECK(back.alphas == cfg.alphas);
    CHECK(back.seed == cfg.seed);
    CHECK(back.score_predictor == conformal::ScorePredictor::Observed);
    CHECK(back.calibrated_conformal);
    CHECK(back.simultaneous);
}

TEST_CASE("scenario files share the grammar") {
    std::istringstream in(
        "# synthetic year\n"
        "train_days = 120\n"
        "test_days = 90\n"
        "train_start = 2019-04-01\n"
        "base = 20\n"
        "trend = 0\n"
        "seasonal_amp = 2.5\n"
        "temp_effect = 1.2\n"
        "noise_scale = 0.9\n"
        "hetero = 0.1\n"
        "phi = 0.5\n"
        "am_base = 3\n"
        "am_carryover = 0.45\n"
        "am_noise = 0.8\n");
    const synth::ScenarioSpec spec = config::parse_scenario(in);
    CHECK(spec.train_days == 120);
    CHECK(spec.test_days == 90);
    CHECK(format_iso_date(spec.train_start) == "2019-04-01");
    CHECK(spec.base == 20.0);
    CHECK(spec.trend == 0.0);
    CHECK(spec.seasonal_amp == 2.5);
    CHECK(spec.temp_effect == 1.2);
    CHECK(spec.noise_scale == 0.9);
    CHECK(spec.hetero == 0.1);
    CHECK(spec.phi == 0.5);
    CHECK(spec.am_base == 3.0);
    CHECK(spec.am_carryover == 0.45);
    CHECK(spec.am_noise == 0.8);

    SUBCASE("unknown scenario keys are fatal") {
        std::istringstream bad("humidity_effect = 2\n");
        CHECK_THROWS_WITH_AS(config::parse_scenario(bad),
                             "unknown scenario key 'humidity_effect'", ConfigError);
    }
    SUBCASE("parsed scenarios are validated") {
        std::istringstream bad("train_days = 10\n");
        CHECK_THROWS_AS(config::parse_scenario(bad), ConfigError);
    }
    SUBCASE("an empty file yields the default scenario") {
        std::istringstream empty("");
        const synth::ScenarioSpec d = config::parse_scenario(empty);
        CHECK(d.train_days == synth::ScenarioSpec{}.train_days);
    }
}

TEST_CASE("loading from disk reports unreadable paths") {
    CHECK_THROWS_AS(config::load_run_config("/nonexistent/run.cfg"), ConfigError);
    CHECK_THROWS_AS(config::load_scenario("/nonexistent/scenario.cfg"), ConfigError);

    const auto path = std::filesystem::temp_directory_path() / "heatcast_config_grammar.cfg";
    {
        std::ofstream out(path);
        out << "tau = 0.8\nseed = 5\n";
    }
    const RunConfig cfg = config::load_run_config(path.string());
    CHECK(cfg.tau == 0.8);
    CHECK(cfg.seed == 5);
    std::filesystem::remove(path);
}
