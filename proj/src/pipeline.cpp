#include "heatcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "heatcast/boosting.hpp"
#include "heatcast/conformal.hpp"
#include "heatcast/csv.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/evaluate.hpp"
#include "heatcast/forest.hpp"
#include "heatcast/ingest.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/smoother.hpp"
#include "heatcast/stats.hpp"

namespace heatcast::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolName = "heatcast";
constexpr const char* kToolVersion = "1.0.0";

constexpr const char* kExchangeabilityNote =
    "The Ljung-Box check certifies second-order whiteness only; exchangeability of the "
    "nonconformity scores is a stronger assumption than the test can establish.";

std::string innovation_note(const std::string& channel) {
    return channel + " scores were AR(1)-whitened; their quantiles live on the innovation "
                     "scale but are added to the point forecast without inverting the filter.";
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("failed while writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

template <typename Fn>
void write_via(const fs::path& path, Fn&& writer) {
    std::ostringstream buffer;
    writer(buffer);
    write_text(path, buffer.str());
}

std::span<const double> predictor_span(const ingest::SupervisedRow& row) {
    return std::span<const double>(row.predictors->data(), ingest::kPredictorCount);
}

/// Per-row model predictions aligned with the frame; NaN where the row has no
/// predictors.
std::vector<double> aligned_pm_fit(const ingest::SupervisedFrame& frame,
                                   const boosting::BoostedEnsemble& model) {
    std::vector<double> out(frame.rows.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < frame.rows.size(); ++i) {
        if (frame.rows[i].predictors) out[i] = model.predict(predictor_span(frame.rows[i]));
    }
    return out;
}

std::vector<double> aligned_am_fit(std::span<const double> pm_fit,
                                   const smoother::LoessModel& loess) {
    std::vector<double> out(pm_fit.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 1; t < pm_fit.size(); ++t) {
        if (std::isfinite(pm_fit[t - 1])) out[t] = loess.predict(pm_fit[t - 1]).value;
    }
    return out;
}

nlohmann::json whiteness_artifact(const conformal::ChannelCalibration& calib) {
    auto report = [](const tsdiag::WhitenessResult& w) {
        return nlohmann::json{{"statistic", w.statistic}, {"p_value", w.p_value},
                              {"lags", w.lags},           {"df", w.df},
                              {"pass", w.pass},           {"lag1_autocorr", w.lag1_autocorr()}};
    };
    nlohmann::json j{
        {"channel", conformal::channel_name(calib.channel)},
        {"raw", report(calib.raw_whiteness)},
        {"final", report(calib.whiteness)},
        {"ar1_applied", calib.ar1.has_value()},
        {"validity_warning", calib.validity_warning},
    };
    if (calib.ar1) {
        j["ar1"] = {{"phi", calib.ar1->phi},
                    {"intercept", calib.ar1->intercept},
                    {"stationary", calib.ar1->stationary}};
    }
    return j;
}

struct TruthLookup {
    std::map<int, const ingest::SupervisedRow*> by_index;

    explicit TruthLookup(const ingest::SupervisedFrame& frame) {
        for (const auto& row : frame.rows) by_index.emplace(row.day_index, &row);
    }

    std::optional<double> pm(int t_index) const {
        const auto it = by_index.find(t_index);
        return it != by_index.end() && it->second->y_pm ? it->second->y_pm : std::nullopt;
    }
    std::optional<double> am(int t_index) const {
        const auto it = by_index.find(t_index);
        return it != by_index.end() && it->second->y_am ? it->second->y_am : std::nullopt;
    }
};

/// Intervals paired with their realized outcomes, for the audit.
void audited(const std::vector<conformal::ForecastInterval>& intervals,
             const TruthLookup& lookup, bool am,
             std::vector<conformal::ForecastInterval>& kept, std::vector<double>& truths) {
    for (const auto& iv : intervals) {
        const auto truth = am ? lookup.am(iv.t_index) : lookup.pm(iv.t_index);
        if (!truth) continue;
        kept.push_back(iv);
        truths.push_back(*truth);
    }
}

std::vector<conformal::ForecastInterval> filter_alpha(
    const std::vector<conformal::ForecastInterval>& intervals, double alpha) {
    std::vector<conformal::ForecastInterval> out;
    for (const auto& iv : intervals) {
        if (std::abs(iv.alpha - alpha) < 1e-12) out.push_back(iv);
    }
    return out;
}

ingest::SupervisedFrame load_frame_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return ingest::read_frame_csv(in);
}

struct LoadedRun {
    std::shared_ptr<const boosting::BoostedEnsemble> ensemble;
    std::shared_ptr<const smoother::LoessModel> loess;
    std::optional<conformal::ChannelCalibration> pm;
    std::optional<conformal::ChannelCalibration> am;
};

LoadedRun load_run(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a run directory");
    LoadedRun run;
    run.ensemble = std::make_shared<const boosting::BoostedEnsemble>(
        boosting::BoostedEnsemble::from_json(read_json(dir / artifact::kBoosting)));

    conformal::ChannelCalibration pm =
        conformal::ChannelCalibration::from_json(read_json(dir / artifact::kCalibrationPm));
    pm.pm_model = run.ensemble;
    run.pm = std::move(pm);

    if (fs::exists(dir / artifact::kLoess)) {
        run.loess = std::make_shared<const smoother::LoessModel>(
            smoother::LoessModel::from_json(read_json(dir / artifact::kLoess)));
    }
    if (fs::exists(dir / artifact::kCalibrationAm)) {
        if (!run.loess) throw DataError("02:00 calibration present without its smoother");
        conformal::ChannelCalibration am =
            conformal::ChannelCalibration::from_json(read_json(dir / artifact::kCalibrationAm));
        am.pm_model = run.ensemble;
        am.am_model = run.loess;
        run.am = std::move(am);
    }
    return run;
}

std::vector<double> adjusted_levels(const std::vector<double>& alphas, bool simultaneous) {
    if (!simultaneous || alphas.size() <= 1) return alphas;
    std::vector<double> out;
    out.reserve(alphas.size());
    const double m = static_cast<double>(alphas.size());
    for (double a : alphas) out.push_back(a / m);
    return out;
}

std::string summarize_scores(std::span<const double> scores) {
    const double mean = stats::mean(scores);
    const double sd = std::sqrt(stats::variance(scores));
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    std::ostringstream out;
    out << "n=" << scores.size() << " mean=" << csv::format_double(mean)
        << " sd=" << csv::format_double(sd) << " min=" << csv::format_double(*mn)
        << " max=" << csv::format_double(*mx);
    return out.str();
}

void print_whiteness_line(std::ostream& out, const char* label,
                          const tsdiag::WhitenessResult& w) {
    out << "  " << label << ": Q=" << csv::format_double(w.statistic) << " df=" << w.df
        << " p=" << csv::format_double(w.p_value) << " -> " << (w.pass ? "PASS" : "FAIL")
        << "\n";
}

void diagnose_channel(std::ostream& out, const conformal::ChannelCalibration& calib) {
    out << "channel " << conformal::channel_name(calib.channel) << "\n";
    out << "  scores: " << summarize_scores(calib.scores) << "\n";
    out << "  score predictor: " << conformal::score_predictor_name(calib.score_predictor_kind)
        << "\n";
    print_whiteness_line(out, "raw whiteness", calib.raw_whiteness);
    if (calib.ar1) {
        out << "  AR(1): applied phi=" << csv::format_double(calib.ar1->phi)
            << " intercept=" << csv::format_double(calib.ar1->intercept)
            << (calib.ar1->stationary ? "" : " (non-stationary fit)") << "\n";
        print_whiteness_line(out, "whitened", calib.whiteness);
    } else {
        out << "  AR(1): not needed\n";
    }
    out << "  scores exchangeable: " << (calib.validity_warning ? "FAIL" : "PASS") << "\n";
}

}  // namespace

void cmd_run(config::RunConfig config) {
    config.dedupe_alphas();
    config.validate();

    const fs::path dir(config.out_dir);
    fs::create_directories(dir);

    nlohmann::json manifest{
        {"name", kToolName},
        {"version", kToolVersion},
        {"complete", false},
        {"stage", "start"},
        {"error", nullptr},
        {"config", config.to_json()},
        {"warnings", config.warnings},
        {"notes", nlohmann::json::array({kExchangeabilityNote})},
        {"outputs", nlohmann::json::array()},
    };
    write_json(dir / artifact::kManifest, manifest);

    std::vector<std::string> warnings = config.warnings;
    std::vector<std::string> outputs;
    auto emit = [&](const char* name, auto&& writer) {
        write_via(dir / name, writer);
        outputs.push_back(name);
    };

    std::string current_stage = "ingest";
    auto record_failure = [&](const char* type, const std::string& message) {
        manifest["stage"] = current_stage;
        manifest["error"] = {{"stage", current_stage}, {"type", type}, {"message", message}};
        manifest["warnings"] = warnings;
        manifest["outputs"] = outputs;
        try {
            write_json(dir / artifact::kManifest, manifest);
        } catch (...) {
            // The original error matters more than a manifest write failure.
        }
    };

    try {
        // ingest
        ingest::SupervisedFrame train_frame;
        ingest::SupervisedFrame test_frame;
        {
            auto load = [&](const std::string& path, std::optional<CalendarDate> start,
                            std::optional<CalendarDate> end) {
                std::ifstream in(path, std::ios::binary);
                if (!in) throw DataError("cannot open '" + path + "'");
                if (config.input_format == "frame") return ingest::read_frame_csv(in);
                const ingest::ParseResult parsed = ingest::parse_station_csv(in, config.columns);
                return ingest::build_frame(parsed.records, config.lag_days, *start, *end);
            };
            train_frame = load(config.train_csv, config.train_start, config.train_end);
            test_frame = load(config.test_csv, config.test_start, config.test_end);
            emit(artifact::kTrainFrame,
                 [&](std::ostream& out) { ingest::write_frame_csv(train_frame, out); });
            emit(artifact::kTestFrame,
                 [&](std::ostream& out) { ingest::write_frame_csv(test_frame, out); });
        }

        // boosting
        current_stage = "boosting";
        std::shared_ptr<const boosting::BoostedEnsemble> ensemble;
        std::vector<double> pm_fit;
        {
            const auto train_rows = train_frame.complete_rows();
            const auto test_rows = test_frame.complete_rows();
            boosting::BoostParams params;
            params.tau = config.tau;
            params.shrinkage = config.shrinkage;
            params.depth = config.depth;
            params.min_node = config.min_node;
            params.max_trees = config.max_trees;
            params.bag_fraction = config.bag_fraction;
            params.seed = derive_seed(config.seed, "boosting");
            boosting::BoostedEnsemble trained = boosting::train(
                train_frame.predictor_matrix(train_rows), train_frame.pm_response(train_rows),
                test_frame.predictor_matrix(test_rows), test_frame.pm_response(test_rows),
                params);
            if (trained.best_iter_fallback) {
                warnings.push_back(
                    "test frame had no usable rows; best_iter fell back to max_trees");
            }
            emit(artifact::kLossCurveTrain, [&](std::ostream& out) {
                boosting::write_loss_curve_csv(trained.train_loss_curve, out);
            });
            emit(artifact::kLossCurveTest, [&](std::ostream& out) {
                boosting::write_loss_curve_csv(trained.test_loss_curve, out);
            });
            // Trees past best_iter never contribute to default predictions;
            // dropping them keeps the artifact compact.
            write_json(dir / artifact::kBoosting, trained.to_json(trained.best_iter));
            outputs.push_back(artifact::kBoosting);
            ensemble = std::make_shared<const boosting::BoostedEnsemble>(std::move(trained));
            pm_fit = aligned_pm_fit(train_frame, *ensemble);
        }

        // smoother
        current_stage = "smoother";
        std::shared_ptr<const smoother::LoessModel> loess;
        std::vector<double> am_fit;
        {
            const auto [pair_x, pair_y] = smoother::pair_am_channel(train_frame, pm_fit);
            loess = std::make_shared<const smoother::LoessModel>(
                smoother::fit_loess(pair_x, pair_y, config.loess_span, config.loess_degree));
            write_json(dir / artifact::kLoess, loess->to_json());
            outputs.push_back(artifact::kLoess);
            am_fit = aligned_am_fit(pm_fit, *loess);
        }

        // calibrate
        current_stage = "calibrate";
        conformal::QrfConfig qrf{config.qrf_trees, config.qrf_min_node};
        conformal::ChannelCalibration calib_pm =
            conformal::calibrate_pm(train_frame, ensemble, qrf, config.score_predictor,
                                    config.calibrated_conformal,
                                    derive_seed(config.seed, "calibrate_pm"));
        conformal::ChannelCalibration calib_am =
            conformal::calibrate_am(train_frame, ensemble, loess, qrf,
                                    config.calibrated_conformal,
                                    derive_seed(config.seed, "calibrate_am"));
        {
            write_json(dir / artifact::kCalibrationPm, calib_pm.to_json());
            outputs.push_back(artifact::kCalibrationPm);
            write_json(dir / artifact::kCalibrationAm, calib_am.to_json());
            outputs.push_back(artifact::kCalibrationAm);
            write_json(dir / artifact::kWhitenessPm, whiteness_artifact(calib_pm));
            outputs.push_back(artifact::kWhitenessPm);
            write_json(dir / artifact::kWhitenessAm, whiteness_artifact(calib_am));
            outputs.push_back(artifact::kWhitenessAm);
            if (calib_pm.validity_warning) {
                warnings.push_back("PM scores still fail the whiteness test after AR(1); "
                                   "their intervals carry validity_warning");
            }
            if (calib_am.validity_warning) {
                warnings.push_back("AM scores still fail the whiteness test after AR(1); "
                                   "their intervals carry validity_warning");
            }
            if (calib_pm.ar1) {
                manifest["notes"].push_back(innovation_note("PM"));
            }
            if (calib_am.ar1) {
                manifest["notes"].push_back(innovation_note("AM"));
            }
        }

        // forecast
        current_stage = "forecast";
        std::vector<conformal::ForecastInterval> intervals_pm;
        std::vector<conformal::ForecastInterval> intervals_am;
        {
            const std::vector<double> levels = adjusted_levels(config.alphas, config.simultaneous);
            for (const auto& row : test_frame.rows) {
                if (!row.predictors) continue;
                const auto x = predictor_span(row);
                for (double alpha : levels) {
                    conformal::ForecastInterval iv = conformal::forecast_pm(calib_pm, x, alpha);
                    iv.t_index = row.day_index;
                    iv.date = row.date;
                    intervals_pm.push_back(iv);
                }
                for (double alpha : levels) {
                    // The smoother was trained on next-day 02:00 responses, so
                    // this interval targets the day after the case's own date.
                    conformal::ForecastInterval iv =
                        conformal::forecast_am(calib_pm, calib_am, x, alpha);
                    iv.t_index = row.day_index + 1;
                    iv.date = add_days(row.date, 1);
                    intervals_am.push_back(iv);
                }
            }
            emit(artifact::kIntervalsPm, [&](std::ostream& out) {
                conformal::write_intervals_csv(intervals_pm, out);
            });
            emit(artifact::kIntervalsAm, [&](std::ostream& out) {
                conformal::write_intervals_csv(intervals_am, out);
            });
        }

        // evaluate
        current_stage = "evaluate";
        {
            const TruthLookup lookup(test_frame);
            std::vector<conformal::ForecastInterval> pm_audited;
            std::vector<double> pm_truths;
            audited(intervals_pm, lookup, false, pm_audited, pm_truths);
            std::vector<conformal::ForecastInterval> am_audited;
            std::vector<double> am_truths;
            audited(intervals_am, lookup, true, am_audited, am_truths);
            const evaluate::CoverageReport pm_cov = evaluate::coverage_audit(pm_audited, pm_truths);
            const evaluate::CoverageReport am_cov = evaluate::coverage_audit(am_audited, am_truths);
            emit(artifact::kCoverage, [&](std::ostream& out) {
                evaluate::write_coverage_csv(pm_cov.by_alpha, am_cov.by_alpha, out);
            });

            std::vector<evaluate::IntervalSummary> summaries;
            for (double alpha : adjusted_levels(config.alphas, config.simultaneous)) {
                for (const auto* intervals : {&intervals_pm, &intervals_am}) {
                    const auto subset = filter_alpha(*intervals, alpha);
                    if (subset.empty()) continue;
                    summaries.push_back(evaluate::summarize_intervals(
                        subset, evaluate::Subset::TopDecileByForecast));
                }
            }
            bool has_table_levels = true;
            for (double alpha : {0.10, 0.30}) {
                for (auto channel : {conformal::Channel::PM, conformal::Channel::AM}) {
                    const bool found =
                        std::any_of(summaries.begin(), summaries.end(), [&](const auto& s) {
                            return s.channel == channel && std::abs(s.alpha - alpha) < 1e-9;
                        });
                    has_table_levels = has_table_levels && found;
                }
            }
            if (has_table_levels) {
                emit(artifact::kTable1, [&](std::ostream& out) {
                    evaluate::write_table1_csv(summaries, out);
                });
            } else {
                warnings.push_back("interval-length table skipped: it needs alpha levels "
                                   "0.10 and 0.30 for both channels");
            }

            emit(artifact::kFitSeriesPm, [&](std::ostream& out) {
                evaluate::write_fit_series_csv(train_frame, conformal::Channel::PM, pm_fit,
                                               config.loess_span, config.loess_degree, out);
            });
            emit(artifact::kFitSeriesAm, [&](std::ostream& out) {
                evaluate::write_fit_series_csv(train_frame, conformal::Channel::AM, am_fit,
                                               config.loess_span, config.loess_degree, out);
            });
        }

        manifest["complete"] = true;
        manifest["stage"] = "done";
        manifest["warnings"] = warnings;
        manifest["outputs"] = outputs;
        write_json(dir / artifact::kManifest, manifest);
    } catch (const ConfigError& e) {
        record_failure("config", e.what());
        throw ConfigError("stage=" + current_stage + ": " + e.what());
    } catch (const DataError& e) {
        record_failure("data", e.what());
        throw DataError("stage=" + current_stage + ": " + e.what());
    } catch (const ModelError& e) {
        record_failure("model", e.what());
        throw ModelError("stage=" + current_stage + ": " + e.what());
    } catch (const std::exception& e) {
        record_failure("internal", e.what());
        throw ModelError("stage=" + current_stage + ": " + std::string(e.what()));
    }
}

void cmd_forecast(const std::string& model_dir, const std::string& predictors_csv,
                  std::vector<double> alphas, bool simultaneous, std::ostream& out) {
    const LoadedRun run = load_run(model_dir);
    if (alphas.empty()) alphas = {0.10, 0.30};

    std::ifstream in(predictors_csv, std::ios::binary);
    if (!in) throw DataError("cannot open '" + predictors_csv + "'");
    const csv::Table table = csv::read_delimited(in, ',');

    std::array<int, ingest::kPredictorCount> x_cols{};
    for (int j = 0; j < static_cast<int>(ingest::kPredictorCount); ++j) {
        const std::string name = "x" + std::to_string(j + 1);
        x_cols[static_cast<std::size_t>(j)] = table.column(name);
        if (x_cols[static_cast<std::size_t>(j)] < 0) {
            throw DataError("predictor file lacks column '" + name + "'");
        }
    }
    const int t_col = table.column("t");
    const int date_col = table.column("date");

    const std::vector<double> levels = adjusted_levels(alphas, simultaneous);
    std::vector<conformal::ForecastInterval> intervals;
    int fallback_index = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        ++fallback_index;

        std::array<double, ingest::kPredictorCount> x{};
        bool incomplete = false;
        for (std::size_t j = 0; j < static_cast<std::size_t>(ingest::kPredictorCount); ++j) {
            const std::string& field = row[static_cast<std::size_t>(x_cols[j])];
            if (field.empty()) {
                incomplete = true;
                break;
            }
            try {
                x[j] = csv::parse_double(field);
            } catch (const DataError&) {
                throw DataError("row " + std::to_string(r + 1) + ": column 'x" +
                                std::to_string(j + 1) + "' holds unparseable '" + field + "'");
            }
        }
        if (incomplete) continue;

        int t_index = fallback_index;
        if (t_col >= 0 && !row[static_cast<std::size_t>(t_col)].empty()) {
            t_index = static_cast<int>(csv::parse_long(row[static_cast<std::size_t>(t_col)]));
        }
        std::optional<CalendarDate> date;
        if (date_col >= 0 && !row[static_cast<std::size_t>(date_col)].empty()) {
            date = parse_iso_date(row[static_cast<std::size_t>(date_col)]);
        }

        for (double alpha : levels) {
            conformal::ForecastInterval iv = conformal::forecast_pm(*run.pm, x, alpha);
            iv.t_index = t_index;
            iv.date = date;
            intervals.push_back(iv);
        }
        if (run.am) {
            for (double alpha : levels) {
                conformal::ForecastInterval iv =
                    conformal::forecast_am(*run.pm, *run.am, x, alpha);
                iv.t_index = t_index + 1;
                if (date) iv.date = add_days(*date, 1);
                intervals.push_back(iv);
            }
        }
    }
    conformal::write_intervals_csv(intervals, out);
}

void cmd_diagnose(const std::string& model_dir, std::ostream& out) {
    const fs::path dir(model_dir);
    const LoadedRun run = load_run(dir);
    diagnose_channel(out, *run.pm);
    if (run.am) diagnose_channel(out, *run.am);

    if (fs::exists(dir / artifact::kIntervalsAm)) {
        std::ifstream in(dir / artifact::kIntervalsAm, std::ios::binary);
        const auto intervals = conformal::read_intervals_csv(in);
        const std::size_t extrapolated = static_cast<std::size_t>(std::count_if(
            intervals.begin(), intervals.end(), [](const auto& iv) { return iv.extrapolated; }));
        out << "extrapolated 02:00 intervals: " << extrapolated << " of " << intervals.size()
            << "\n";
    }

    std::vector<std::string> warnings;
    if (fs::exists(dir / artifact::kManifest)) {
        const nlohmann::json manifest = read_json(dir / artifact::kManifest);
        if (manifest.contains("warnings")) {
            warnings = manifest.at("warnings").get<std::vector<std::string>>();
        }
    }
    if (warnings.empty()) {
        out << "validity warnings: none\n";
    } else {
        out << "validity warnings:\n";
        for (const auto& w : warnings) out << "  - " << w << "\n";
    }
}

void cmd_evaluate(const std::string& model_dir, std::ostream& out) {
    const fs::path dir(model_dir);
    const ingest::SupervisedFrame test_frame = load_frame_file(dir / artifact::kTestFrame);
    const TruthLookup lookup(test_frame);

    auto report_channel = [&](const char* label, const char* file, bool am) {
        if (!fs::exists(dir / file)) return;
        std::ifstream in(dir / file, std::ios::binary);
        const auto intervals = conformal::read_intervals_csv(in);
        if (intervals.empty()) return;

        std::vector<conformal::ForecastInterval> kept;
        std::vector<double> truths;
        audited(intervals, lookup, am, kept, truths);
        const evaluate::CoverageReport cov = evaluate::coverage_audit(kept, truths);
        for (const auto& bucket : cov.by_alpha) {
            out << label << " coverage alpha=" << csv::format_double(bucket.alpha) << ": "
                << bucket.covered << "/" << bucket.n << " = "
                << csv::format_double(bucket.coverage) << "\n";
        }
        std::vector<double> alphas;
        for (const auto& iv : intervals) {
            if (std::find(alphas.begin(), alphas.end(), iv.alpha) == alphas.end()) {
                alphas.push_back(iv.alpha);
            }
        }
        std::sort(alphas.begin(), alphas.end());
        for (double alpha : alphas) {
            const auto subset = filter_alpha(intervals, alpha);
            const auto summary =
                evaluate::summarize_intervals(subset, evaluate::Subset::TopDecileByForecast);
            out << label << " top-decile length alpha=" << csv::format_double(alpha)
                << ": min=" << csv::format_double(summary.min_len)
                << " mean=" << csv::format_double(summary.mean_len)
                << " max=" << csv::format_double(summary.max_len) << " (n=" << summary.n
                << ")\n";
        }
    };
    report_channel("PM", artifact::kIntervalsPm, false);
    report_channel("AM", artifact::kIntervalsAm, true);
}

void cmd_synth(const synth::ScenarioSpec& spec, std::uint64_t seed, const std::string& out_dir) {
    const synth::SynthData data = synth::synth_generate(spec, seed);
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    write_via(dir / artifact::kTrainFrame,
              [&](std::ostream& out) { ingest::write_frame_csv(data.train, out); });
    write_via(dir / artifact::kTestFrame,
              [&](std::ostream& out) { ingest::write_frame_csv(data.test, out); });

    auto write_oracle = [&](const char* name, const ingest::SupervisedFrame& frame,
                            const synth::QuantileOracle& oracle) {
        write_via(dir / name, [&](std::ostream& out) {
            csv::write_row(out, {"t", "date", "pm_mean", "pm_sd", "pm_q90", "am_mean", "am_sd",
                                 "am_q90"},
                           ',');
            for (std::size_t i = 0; i < frame.rows.size(); ++i) {
                const auto& row = frame.rows[i];
                const bool has_am = std::isfinite(oracle.am_mean[i]);
                csv::write_row(
                    out,
                    {std::to_string(row.day_index), format_iso_date(row.date),
                     csv::format_double(oracle.pm_mean[i]), csv::format_double(oracle.pm_sd[i]),
                     csv::format_double(oracle.pm_quantile(i, 0.9)),
                     has_am ? csv::format_double(oracle.am_mean[i]) : std::string(),
                     has_am ? csv::format_double(oracle.am_sd[i]) : std::string(),
                     has_am ? csv::format_double(oracle.am_quantile(i, 0.9)) : std::string()},
                    ',');
            }
        });
    };
    write_oracle("oracle_train.csv", data.train, data.train_oracle);
    write_oracle("oracle_test.csv", data.test, data.test_oracle);

    nlohmann::json scenario{
        {"seed", seed},
        {"train_days", spec.train_days},
        {"test_days", spec.test_days},
        {"train_start", format_iso_date(spec.train_start)},
        {"test_start", format_iso_date(spec.test_start)},
        {"base", spec.base},
        {"trend", spec.trend},
        {"seasonal_amp", spec.seasonal_amp},
        {"seasonal_period", spec.seasonal_period},
        {"temp_effect", spec.temp_effect},
        {"noise_scale", spec.noise_scale},
        {"hetero", spec.hetero},
        {"phi", spec.phi},
        {"am_base", spec.am_base},
        {"am_carryover", spec.am_carryover},
        {"am_noise", spec.am_noise},
    };
    write_json(dir / "scenario.json", scenario);
}

}  // namespace heatcast::pipeline
