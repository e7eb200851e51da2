#include "heatcast/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "heatcast/csv.hpp"
#include "heatcast/errors.hpp"

namespace heatcast::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + value + "'");
}

double parse_fraction(const std::string& value, const std::string& key) {
    double v;
    try {
        v = csv::parse_double(value);
    } catch (const DataError&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
    }
    return v;
}

long parse_int(const std::string& value, const std::string& key) {
    try {
        return csv::parse_long(value);
    } catch (const DataError&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

CalendarDate parse_date_value(const std::string& value, const std::string& key) {
    try {
        return parse_iso_date(value);
    } catch (const DataError&) {
        throw ConfigError("key '" + key + "' expects an ISO date, got '" + value + "'");
    }
}

template <typename Fn>
void for_each_pair(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        }
        fn(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

}  // namespace

void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "train_csv") {
        config.train_csv = value;
    } else if (key == "test_csv") {
        config.test_csv = value;
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else if (key == "input_format") {
        if (value != "station" && value != "frame") {
            throw ConfigError("input_format must be 'station' or 'frame', got '" + value + "'");
        }
        config.input_format = value;
    } else if (key == "col_date") {
        config.columns.date = value;
    } else if (key == "col_hour") {
        config.columns.hour = value;
    } else if (key == "col_wind_dir") {
        config.columns.wind_dir = value;
    } else if (key == "col_wind_speed") {
        config.columns.wind_speed = value;
    } else if (key == "col_air_temp") {
        config.columns.air_temp = value;
    } else if (key == "col_pressure") {
        config.columns.pressure = value;
    } else if (key == "col_visibility") {
        config.columns.visibility = value;
    } else if (key == "col_dew_point") {
        config.columns.dew_point = value;
    } else if (key == "col_rel_humidity") {
        config.columns.rel_humidity = value;
    } else if (key == "timestamp_format") {
        config.columns.timestamp_format = value;
    } else if (key == "delimiter") {
        if (value.size() != 1) throw ConfigError("delimiter must be a single character");
        config.columns.delimiter = value[0];
    } else if (key == "missing_sentinels") {
        config.columns.missing_sentinels = split_list(value);
    } else if (key == "train_start") {
        config.train_start = parse_date_value(value, key);
    } else if (key == "train_end") {
        config.train_end = parse_date_value(value, key);
    } else if (key == "test_start") {
        config.test_start = parse_date_value(value, key);
    } else if (key == "test_end") {
        config.test_end = parse_date_value(value, key);
    } else if (key == "lag_days") {
        config.lag_days = static_cast<int>(parse_int(value, key));
    } else if (key == "tau") {
        config.tau = parse_fraction(value, key);
    } else if (key == "shrinkage") {
        config.shrinkage = parse_fraction(value, key);
    } else if (key == "depth") {
        config.depth = static_cast<int>(parse_int(value, key));
    } else if (key == "min_node") {
        config.min_node = static_cast<int>(parse_int(value, key));
    } else if (key == "max_trees") {
        config.max_trees = static_cast<std::size_t>(parse_int(value, key));
    } else if (key == "bag_fraction") {
        config.bag_fraction = parse_fraction(value, key);
    } else if (key == "loess_span") {
        config.loess_span = parse_fraction(value, key);
    } else if (key == "loess_degree") {
        config.loess_degree = static_cast<int>(parse_int(value, key));
    } else if (key == "qrf_trees") {
        config.qrf_trees = static_cast<std::size_t>(parse_int(value, key));
    } else if (key == "qrf_min_node") {
        config.qrf_min_node = static_cast<int>(parse_int(value, key));
    } else if (key == "alphas") {
        config.alphas.clear();
        for (const std::string& item : split_list(value)) {
            config.alphas.push_back(parse_fraction(item, key));
        }
    } else if (key == "seed") {
        config.seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "score_predictor") {
        config.score_predictor = conformal::parse_score_predictor(value);
    } else if (key == "calibrated_conformal") {
        config.calibrated_conformal = parse_bool(value, key);
    } else if (key == "simultaneous") {
        config.simultaneous = parse_bool(value, key);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig parse_run_config(std::istream& in) {
    RunConfig config;
    for_each_pair(in, [&](const std::string& key, const std::string& value) {
        apply_key(config, key, value);
    });
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_run_config(in);
}

void RunConfig::validate() const {
    if (train_csv.empty()) throw ConfigError("train_csv is required");
    if (test_csv.empty()) throw ConfigError("test_csv is required");
    if (out_dir.empty()) throw ConfigError("out_dir is required");
    if (train_csv == test_csv || train_csv == out_dir || test_csv == out_dir) {
        throw ConfigError("train_csv, test_csv and out_dir must be distinct paths");
    }
    if (input_format == "station") {
        if (!train_start || !train_end || !test_start || !test_end) {
            throw ConfigError("station input needs train_start/train_end/test_start/test_end");
        }
        if (columns.timestamp_format != "iso_date" && columns.timestamp_format != "compact_date" &&
            columns.timestamp_format != "iso_datetime") {
            throw ConfigError("unknown timestamp_format '" + columns.timestamp_format + "'");
        }
    }
    if (lag_days < 0) throw ConfigError("lag_days must be >= 0");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (!(shrinkage > 0.0)) throw ConfigError("shrinkage must be positive");
    if (depth < 0) throw ConfigError("depth must be >= 0");
    if (min_node < 1 || qrf_min_node < 1) throw ConfigError("min node sizes must be >= 1");
    if (max_trees < 1) throw ConfigError("max_trees must be >= 1");
    if (!(bag_fraction > 0.0 && bag_fraction <= 1.0)) {
        throw ConfigError("bag_fraction must lie in (0, 1]");
    }
    if (!(loess_span > 0.0 && loess_span <= 1.0)) throw ConfigError("loess_span must lie in (0, 1]");
    if (loess_degree != 1 && loess_degree != 2) throw ConfigError("loess_degree must be 1 or 2");
    if (qrf_trees < 1) throw ConfigError("qrf_trees must be >= 1");
    if (alphas.empty()) throw ConfigError("at least one alpha level is required");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("every alpha must lie in (0, 1)");
    }
}

void RunConfig::dedupe_alphas() {
    std::vector<double> unique;
    for (double a : alphas) {
        if (std::find(unique.begin(), unique.end(), a) != unique.end()) {
            warnings.push_back("duplicate alpha level " + csv::format_double(a) + " removed");
        } else {
            unique.push_back(a);
        }
    }
    alphas = std::move(unique);
}

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{
        {"train_csv", train_csv},
        {"test_csv", test_csv},
        {"out_dir", out_dir},
        {"input_format", input_format},
        {"columns",
         {{"date", columns.date},
          {"hour", columns.hour},
          {"wind_dir", columns.wind_dir},
          {"wind_speed", columns.wind_speed},
          {"air_temp", columns.air_temp},
          {"pressure", columns.pressure},
          {"visibility", columns.visibility},
          {"dew_point", columns.dew_point},
          {"rel_humidity", columns.rel_humidity},
          {"timestamp_format", columns.timestamp_format},
          {"delimiter", std::string(1, columns.delimiter)},
          {"missing_sentinels", columns.missing_sentinels}}},
        {"train_start", train_start ? format_iso_date(*train_start) : ""},
        {"train_end", train_end ? format_iso_date(*train_end) : ""},
        {"test_start", test_start ? format_iso_date(*test_start) : ""},
        {"test_end", test_end ? format_iso_date(*test_end) : ""},
        {"lag_days", lag_days},
        {"tau", tau},
        {"shrinkage", shrinkage},
        {"depth", depth},
        {"min_node", min_node},
        {"max_trees", max_trees},
        {"bag_fraction", bag_fraction},
        {"loess_span", loess_span},
        {"loess_degree", loess_degree},
        {"qrf_trees", qrf_trees},
        {"qrf_min_node", qrf_min_node},
        {"alphas", alphas},
        {"seed", seed},
        {"score_predictor", conformal::score_predictor_name(score_predictor)},
        {"calibrated_conformal", calibrated_conformal},
        {"simultaneous", simultaneous},
    };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.train_csv = j.at("train_csv").get<std::string>();
    c.test_csv = j.at("test_csv").get<std::string>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.input_format = j.at("input_format").get<std::string>();
    const auto& cols = j.at("columns");
    c.columns.date = cols.at("date").get<std::string>();
    c.columns.hour = cols.at("hour").get<std::string>();
    c.columns.wind_dir = cols.at("wind_dir").get<std::string>();
    c.columns.wind_speed = cols.at("wind_speed").get<std::string>();
    c.columns.air_temp = cols.at("air_temp").get<std::string>();
    c.columns.pressure = cols.at("pressure").get<std::string>();
    c.columns.visibility = cols.at("visibility").get<std::string>();
    c.columns.dew_point = cols.at("dew_point").get<std::string>();
    c.columns.rel_humidity = cols.at("rel_humidity").get<std::string>();
    c.columns.timestamp_format = cols.at("timestamp_format").get<std::string>();
    c.columns.delimiter = cols.at("delimiter").get<std::string>().at(0);
    c.columns.missing_sentinels = cols.at("missing_sentinels").get<std::vector<std::string>>();
    auto date_or_empty = [&](const char* key) -> std::optional<CalendarDate> {
        const std::string s = j.at(key).get<std::string>();
        if (s.empty()) return std::nullopt;
        return parse_iso_date(s);
    };
    c.train_start = date_or_empty("train_start");
    c.train_end = date_or_empty("train_end");
    c.test_start = date_or_empty("test_start");
    c.test_end = date_or_empty("test_end");
    c.lag_days = j.at("lag_days").get<int>();
    c.tau = j.at("tau").get<double>();
    c.shrinkage = j.at("shrinkage").get<double>();
    c.depth = j.at("depth").get<int>();
    c.min_node = j.at("min_node").get<int>();
    c.max_trees = j.at("max_trees").get<std::size_t>();
    c.bag_fraction = j.at("bag_fraction").get<double>();
    c.loess_span = j.at("loess_span").get<double>();
    c.loess_degree = j.at("loess_degree").get<int>();
    c.qrf_trees = j.at("qrf_trees").get<std::size_t>();
    c.qrf_min_node = j.at("qrf_min_node").get<int>();
    c.alphas = j.at("alphas").get<std::vector<double>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.score_predictor = conformal::parse_score_predictor(j.at("score_predictor").get<std::string>());
    c.calibrated_conformal = j.at("calibrated_conformal").get<bool>();
    c.simultaneous = j.at("simultaneous").get<bool>();
    return c;
}

synth::ScenarioSpec parse_scenario(std::istream& in) {
    synth::ScenarioSpec spec;
    for_each_pair(in, [&](const std::string& key, const std::string& value) {
        if (key == "train_days") {
            spec.train_days = static_cast<int>(parse_int(value, key));
        } else if (key == "test_days") {
            spec.test_days = static_cast<int>(parse_int(value, key));
        } else if (key == "train_start") {
            spec.train_start = parse_date_value(value, key);
        } else if (key == "test_start") {
            spec.test_start = parse_date_value(value, key);
        } else if (key == "base") {
            spec.base = parse_fraction(value, key);
        } else if (key == "trend") {
            spec.trend = parse_fraction(value, key);
        } else if (key == "seasonal_amp") {
            spec.seasonal_amp = parse_fraction(value, key);
        } else if (key == "seasonal_period") {
            spec.seasonal_period = parse_fraction(value, key);
        } else if (key == "temp_effect") {
            spec.temp_effect = parse_fraction(value, key);
        } else if (key == "noise_scale") {
            spec.noise_scale = parse_fraction(value, key);
        } else if (key == "hetero") {
            spec.hetero = parse_fraction(value, key);
        } else if (key == "phi") {
            spec.phi = parse_fraction(value, key);
        } else if (key == "am_base") {
            spec.am_base = parse_fraction(value, key);
        } else if (key == "am_carryover") {
            spec.am_carryover = parse_fraction(value, key);
        } else if (key == "am_noise") {
            spec.am_noise = parse_fraction(value, key);
        } else {
            throw ConfigError("unknown scenario key '" + key + "'");
        }
    });
    spec.validate();
    return spec;
}

synth::ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    return parse_scenario(in);
}

}  // namespace heatcast::config
