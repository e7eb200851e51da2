#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "heatcast/config.hpp"
#include "heatcast/synth.hpp"

namespace heatcast::pipeline {

/// Artifact file names inside a run directory.
namespace artifact {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kTrainFrame = "train_frame.csv";
inline constexpr const char* kTestFrame = "test_frame.csv";
inline constexpr const char* kBoosting = "boosting_pm.json";
inline constexpr const char* kLossCurveTrain = "loss_curve_train.csv";
inline constexpr const char* kLossCurveTest = "loss_curve_test.csv";
inline constexpr const char* kLoess = "loess_am.json";
inline constexpr const char* kCalibrationPm = "calibration_pm.json";
inline constexpr const char* kCalibrationAm = "calibration_am.json";
inline constexpr const char* kWhitenessPm = "whiteness_pm.json";
inline constexpr const char* kWhitenessAm = "whiteness_am.json";
inline constexpr const char* kIntervalsPm = "intervals_pm.csv";
inline constexpr const char* kIntervalsAm = "intervals_am.csv";
inline constexpr const char* kCoverage = "coverage.csv";
inline constexpr const char* kTable1 = "table1.csv";
inline constexpr const char* kFitSeriesPm = "fit_series_pm.csv";
inline constexpr const char* kFitSeriesAm = "fit_series_am.csv";
}  // namespace artifact

/// Full pipeline: ingest, boost, smooth, calibrate, forecast the test frame,
/// evaluate, and write every artifact under config.out_dir. Errors carry a
/// stage=... prefix and leave a manifest recording the failure.
void cmd_run(config::RunConfig config);

/// Forecast new unlabeled cases from a saved run directory. The predictors
/// CSV must carry columns x1..x8 (a canonical frame CSV works); optional
/// t and date columns label the outputs. With `simultaneous`, each requested
/// alpha is divided by the number of levels.
void cmd_forecast(const std::string& model_dir, const std::string& predictors_csv,
                  std::vector<double> alphas, bool simultaneous, std::ostream& out);

/// Whiteness reports, AR(1) coefficients, score summaries, extrapolation
/// counts and validity warnings, printed for an operator.
void cmd_diagnose(const std::string& model_dir, std::ostream& out);

/// Re-reads the saved intervals and test frame and prints coverage and
/// interval-length summaries.
void cmd_evaluate(const std::string& model_dir, std::ostream& out);

/// Writes scenario train/test frames plus their quantile-oracle tables.
void cmd_synth(const synth::ScenarioSpec& spec, std::uint64_t seed, const std::string& out_dir);

}  // namespace heatcast::pipeline
