#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "heatcast/boosting.hpp"
#include "heatcast/dates.hpp"
#include "heatcast/forest.hpp"
#include "heatcast/ingest.hpp"
#include "heatcast/smoother.hpp"
#include "heatcast/tsdiag.hpp"

namespace heatcast::conformal {

enum class Channel { PM, AM };

std::string channel_name(Channel c);

/// Which series trains the score forest: the model's fitted values (matching
/// how the forest is queried at forecast time) or the observed responses.
enum class ScorePredictor { Fitted, Observed };

std::string score_predictor_name(ScorePredictor k);
ScorePredictor parse_score_predictor(const std::string& name);

struct QrfConfig {
    std::size_t n_trees = forest::kDefaultTreeCount;
    int min_node = 5;
};

/// Everything needed to turn a point forecast into an adaptive interval:
/// nonconformity scores, the quantile forest over them, the whiteness
/// evidence, and (held by pointer) the base model that produces the points.
struct ChannelCalibration {
    Channel channel = Channel::PM;
    ScorePredictor score_predictor_kind = ScorePredictor::Fitted;

    std::vector<double> scores;            ///< trains the score forest
    std::vector<double> score_predictors;  ///< aligned per-score predictor values
    forest::Forest score_model;

    std::optional<tsdiag::Ar1Fit> ar1;  ///< present when whitening was applied
    tsdiag::WhitenessResult raw_whiteness;
    tsdiag::WhitenessResult whiteness;  ///< test of the final scores
    /// True when the final scores still fail the whiteness test; every
    /// interval built from this calibration then carries the warning.
    bool validity_warning = false;

    /// Split-calibration mode: the forest trains on half the scores and the
    /// held-out half supplies a finite-sample conformity adjustment per alpha.
    bool calibrated = false;
    std::vector<double> holdout_scores;
    std::vector<double> holdout_predictors;

    std::shared_ptr<const boosting::BoostedEnsemble> pm_model;
    std::shared_ptr<const smoother::LoessModel> am_model;  ///< AM channel only

    nlohmann::json to_json() const;
    /// Restores everything except the base-model pointers, which the caller
    /// wires up from their own artifact files.
    static ChannelCalibration from_json(const nlohmann::json& j);
};

struct ForecastInterval {
    int t_index = 0;
    std::optional<CalendarDate> date;
    Channel channel = Channel::PM;
    double alpha = 0.1;
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool extrapolated = false;
    bool validity_warning = false;
};

ChannelCalibration calibrate_pm(const ingest::SupervisedFrame& train_frame,
                                std::shared_ptr<const boosting::BoostedEnsemble> model,
                                const QrfConfig& qrf, ScorePredictor kind, bool calibrated,
                                std::uint64_t seed);

/// AM scores come from the loess fit on (previous-day fitted 14:00, observed
/// 02:00) pairs; the score forest always trains on the fitted values because
/// that is the only predictor available for an unlabeled case.
ChannelCalibration calibrate_am(const ingest::SupervisedFrame& train_frame,
                                std::shared_ptr<const boosting::BoostedEnsemble> pm_model,
                                std::shared_ptr<const smoother::LoessModel> loess_model,
                                const QrfConfig& qrf, bool calibrated, std::uint64_t seed);

/// Interval [point + q_{alpha/2}, point + q_{1-alpha/2}] with the score
/// quantiles read from the forest at the point forecast.
ForecastInterval forecast_pm(const ChannelCalibration& calib, std::span<const double> x_new,
                             double alpha);

/// Chains the 14:00 model through the loess smoother, then applies the AM
/// score quantiles; the extrapolated flag reports a loess query outside its
/// training range.
ForecastInterval forecast_am(const ChannelCalibration& pm_calib,
                             const ChannelCalibration& am_calib, std::span<const double> x_new,
                             double alpha);

/// Per-query levels global_alpha / m for m simultaneous coverage queries.
std::vector<double> bonferroni_adjust(const std::vector<double>& alphas, double global_alpha);

/// Probability statement for "will the outcome exceed `threshold`?" read off
/// a symmetric-tail interval. Outside the bounds the answer is a single tail
/// probability; between them only the range (alpha/2, 1 - alpha/2) can be
/// asserted.
struct ExceedanceEstimate {
    double lower = 0.0;
    double upper = 1.0;
    bool determinate = false;
    double value() const;  ///< only when determinate
};

ExceedanceEstimate lower_bound_exceedance(const ForecastInterval& interval, double threshold);

/// Canonical interval CSV: t_index, date, channel, alpha, point, lower,
/// upper, extrapolated, validity_warning.
void write_intervals_csv(std::span<const ForecastInterval> intervals, std::ostream& out);
std::vector<ForecastInterval> read_intervals_csv(std::istream& in);

}  // namespace heatcast::conformal
