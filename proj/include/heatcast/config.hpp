#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "heatcast/conformal.hpp"
#include "heatcast/dates.hpp"
#include "heatcast/ingest.hpp"
#include "heatcast/synth.hpp"

namespace heatcast::config {

/// Flat key = value run configuration. '#' starts a comment; blank lines are
/// ignored; later keys override earlier ones; unknown keys are errors.
struct RunConfig {
    std::string train_csv;
    std::string test_csv;
    std::string out_dir;
    /// "station" (raw observation rows) or "frame" (canonical frame CSV).
    std::string input_format = "station";

    ingest::ColumnMap columns;
    std::optional<CalendarDate> train_start;
    std::optional<CalendarDate> train_end;
    std::optional<CalendarDate> test_start;
    std::optional<CalendarDate> test_end;
    int lag_days = 14;

    double tau = 0.90;
    double shrinkage = 0.0001;
    int depth = 6;
    int min_node = 5;
    std::size_t max_trees = 100000;
    double bag_fraction = 1.0;

    double loess_span = 0.75;
    int loess_degree = 2;

    std::size_t qrf_trees = 500;
    int qrf_min_node = 5;

    std::vector<double> alphas = {0.10, 0.30};
    std::uint64_t seed = 1;
    conformal::ScorePredictor score_predictor = conformal::ScorePredictor::Fitted;
    bool calibrated_conformal = false;
    bool simultaneous = false;

    /// Non-fatal notes collected while parsing (e.g. duplicate alpha levels).
    std::vector<std::string> warnings;

    /// Range/consistency checks; throws ConfigError.
    void validate() const;

    /// Removes repeated alpha levels (order preserved) and records a warning
    /// for each removal.
    void dedupe_alphas();

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

/// Applies one key = value pair (the config grammar and the CLI flag
/// overrides share this). Throws ConfigError on unknown keys or bad values.
void apply_key(RunConfig& config, const std::string& key, const std::string& value);

/// Scenario files reuse the same grammar with scenario parameter keys.
synth::ScenarioSpec parse_scenario(std::istream& in);
synth::ScenarioSpec load_scenario(const std::string& path);

}  // namespace heatcast::config
