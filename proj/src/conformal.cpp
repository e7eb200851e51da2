#include "heatcast/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "heatcast/csv.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"

namespace heatcast::conformal {

std::string channel_name(Channel c) { return c == Channel::PM ? "PM" : "AM"; }

std::string score_predictor_name(ScorePredictor k) {
    return k == ScorePredictor::Fitted ? "fitted" : "observed";
}

ScorePredictor parse_score_predictor(const std::string& name) {
    if (name == "fitted") return ScorePredictor::Fitted;
    if (name == "observed") return ScorePredictor::Observed;
    throw ConfigError("score predictor must be 'fitted' or 'observed', got '" + name + "'");
}

namespace {

Matrix column_matrix(std::span<const double> v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

/// Whitens the raw scores, aligns the predictor series with the surviving
/// scores, optionally splits off a held-out half, and trains the score
/// forest. Fills every calibration field except channel, kind and the base
/// models.
void build_score_model(ChannelCalibration& calib, std::vector<double> raw_scores,
                       std::span<const double> predictors, const QrfConfig& qrf, bool calibrated,
                       std::uint64_t seed) {
    if (raw_scores.size() != predictors.size()) {
        throw DataError("score and predictor series must align");
    }

    tsdiag::WhitenOutcome white = tsdiag::whiten(raw_scores);
    calib.raw_whiteness = white.raw_report;
    calib.whiteness = white.report;
    calib.ar1 = std::move(white.model);
    calib.validity_warning = !white.report.pass;

    const std::size_t offset = raw_scores.size() - white.scores.size();
    calib.scores = std::move(white.scores);
    calib.score_predictors.assign(predictors.begin() + static_cast<std::ptrdiff_t>(offset),
                                  predictors.end());

    calib.calibrated = calibrated;
    std::vector<double> fit_scores;
    std::vector<double> fit_predictors;
    if (calibrated) {
        // Interleaved split: even positions train the forest, odd positions
        // become the conformity holdout.
        for (std::size_t i = 0; i < calib.scores.size(); ++i) {
            if (i % 2 == 0) {
                fit_scores.push_back(calib.scores[i]);
                fit_predictors.push_back(calib.score_predictors[i]);
            } else {
                calib.holdout_scores.push_back(calib.scores[i]);
                calib.holdout_predictors.push_back(calib.score_predictors[i]);
            }
        }
        if (calib.holdout_scores.empty() ||
            fit_scores.size() < static_cast<std::size_t>(qrf.min_node)) {
            throw DataError("too few scores for split calibration");
        }
    } else {
        fit_scores = calib.scores;
        fit_predictors = calib.score_predictors;
    }

    if (fit_scores.size() < static_cast<std::size_t>(qrf.min_node)) {
        throw DataError("too few scores to train the score forest");
    }
    tree::TreeParams params = forest::default_forest_params(1);
    params.min_node = qrf.min_node;
    calib.score_model = forest::train_forest(column_matrix(fit_predictors), fit_scores,
                                             qrf.n_trees, params, true,
                                             derive_seed(seed, "score_forest"));
}

/// CQR-style finite-sample adjustment from the held-out conformity scores at
/// the requested level.
double conformity_adjustment(const ChannelCalibration& calib, double alpha) {
    const std::size_t m = calib.holdout_scores.size();
    std::vector<double> conformity(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double query = calib.holdout_predictors[i];
        const std::vector<double> w =
            forest::response_weights(calib.score_model, std::span<const double>(&query, 1));
        const double q_lo =
            forest::weighted_quantile(calib.score_model.train_response, w, alpha / 2.0);
        const double q_hi =
            forest::weighted_quantile(calib.score_model.train_response, w, 1.0 - alpha / 2.0);
        conformity[i] = std::max(q_lo - calib.holdout_scores[i],
                                 calib.holdout_scores[i] - q_hi);
    }
    std::sort(conformity.begin(), conformity.end());
    const double dm = static_cast<double>(m);
    std::size_t k = static_cast<std::size_t>(std::ceil((dm + 1.0) * (1.0 - alpha) - 1e-9));
    k = std::min(std::max<std::size_t>(k, 1), m);
    return conformity[k - 1];
}

ForecastInterval interval_from_scores(const ChannelCalibration& calib, double point,
                                      double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const std::vector<double> w =
        forest::response_weights(calib.score_model, std::span<const double>(&point, 1));
    double q_lo = forest::weighted_quantile(calib.score_model.train_response, w, alpha / 2.0);
    double q_hi =
        forest::weighted_quantile(calib.score_model.train_response, w, 1.0 - alpha / 2.0);
    if (calib.calibrated) {
        const double adj = conformity_adjustment(calib, alpha);
        q_lo -= adj;
        q_hi += adj;
        if (q_lo > q_hi) q_lo = q_hi = (q_lo + q_hi) / 2.0;
    }

    ForecastInterval interval;
    interval.channel = calib.channel;
    interval.alpha = alpha;
    interval.point = point;
    interval.lower = point + q_lo;
    interval.upper = point + q_hi;
    interval.validity_warning = calib.validity_warning;
    return interval;
}

nlohmann::json whiteness_to_json(const tsdiag::WhitenessResult& w) {
    return nlohmann::json{{"statistic", w.statistic}, {"p_value", w.p_value},
                          {"lags", w.lags},           {"df", w.df},
                          {"pass", w.pass},           {"autocorrelations", w.autocorrelations}};
}

tsdiag::WhitenessResult whiteness_from_json(const nlohmann::json& j) {
    tsdiag::WhitenessResult w;
    w.statistic = j.at("statistic").get<double>();
    w.p_value = j.at("p_value").get<double>();
    w.lags = j.at("lags").get<std::size_t>();
    w.df = j.at("df").get<std::size_t>();
    w.pass = j.at("pass").get<bool>();
    w.autocorrelations = j.at("autocorrelations").get<std::vector<double>>();
    return w;
}

}  // namespace

ChannelCalibration calibrate_pm(const ingest::SupervisedFrame& train_frame,
                                std::shared_ptr<const boosting::BoostedEnsemble> model,
                                const QrfConfig& qrf, ScorePredictor kind, bool calibrated,
                                std::uint64_t seed) {
    if (!model) throw ModelError("14:00 calibration needs a trained ensemble");
    const std::vector<std::size_t> usable = train_frame.complete_rows();
    if (usable.size() < 25) {
        throw DataError("14:00 calibration needs at least 25 usable days");
    }

    std::vector<double> observed;
    std::vector<double> fitted;
    std::vector<double> residuals;
    observed.reserve(usable.size());
    fitted.reserve(usable.size());
    residuals.reserve(usable.size());
    for (std::size_t i : usable) {
        const auto& row = train_frame.rows[i];
        const double y = *row.y_pm;
        const double y_hat = model->predict(std::span<const double>(row.predictors->data(),
                                                                    ingest::kPredictorCount));
        observed.push_back(y);
        fitted.push_back(y_hat);
        residuals.push_back(y - y_hat);
    }

    ChannelCalibration calib;
    calib.channel = Channel::PM;
    calib.score_predictor_kind = kind;
    calib.pm_model = std::move(model);
    build_score_model(calib, std::move(residuals),
                      kind == ScorePredictor::Fitted ? fitted : observed, qrf, calibrated, seed);
    return calib;
}

ChannelCalibration calibrate_am(const ingest::SupervisedFrame& train_frame,
                                std::shared_ptr<const boosting::BoostedEnsemble> pm_model,
                                std::shared_ptr<const smoother::LoessModel> loess_model,
                                const QrfConfig& qrf, bool calibrated, std::uint64_t seed) {
    if (!pm_model) throw ModelError("02:00 calibration needs the trained 14:00 ensemble");
    if (!loess_model) throw ModelError("02:00 calibration needs the fitted smoother");

    std::vector<double> pm_fitted(train_frame.rows.size(),
                                  std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < train_frame.rows.size(); ++i) {
        const auto& row = train_frame.rows[i];
        if (!row.predictors) continue;
        pm_fitted[i] = pm_model->predict(
            std::span<const double>(row.predictors->data(), ingest::kPredictorCount));
    }

    const auto [pair_x, pair_y] = smoother::pair_am_channel(train_frame, pm_fitted);
    std::vector<double> fitted_am;
    std::vector<double> residuals;
    fitted_am.reserve(pair_x.size());
    residuals.reserve(pair_x.size());
    for (std::size_t i = 0; i < pair_x.size(); ++i) {
        const double y_hat = loess_model->predict(pair_x[i]).value;
        fitted_am.push_back(y_hat);
        residuals.push_back(pair_y[i] - y_hat);
    }

    ChannelCalibration calib;
    calib.channel = Channel::AM;
    calib.score_predictor_kind = ScorePredictor::Fitted;
    calib.pm_model = std::move(pm_model);
    calib.am_model = std::move(loess_model);
    build_score_model(calib, std::move(residuals), fitted_am, qrf, calibrated, seed);
    return calib;
}

ForecastInterval forecast_pm(const ChannelCalibration& calib, std::span<const double> x_new,
                             double alpha) {
    if (calib.channel != Channel::PM) throw ModelError("calibration is not for the 14:00 channel");
    if (!calib.pm_model) throw ModelError("calibration lacks its base ensemble");
    if (x_new.size() != ingest::kPredictorCount) {
        throw DataError("new case must supply " + std::to_string(ingest::kPredictorCount) +
                        " predictors");
    }
    const double point = calib.pm_model->predict(x_new);
    return interval_from_scores(calib, point, alpha);
}

ForecastInterval forecast_am(const ChannelCalibration& pm_calib,
                             const ChannelCalibration& am_calib, std::span<const double> x_new,
                             double alpha) {
    if (am_calib.channel != Channel::AM) throw ModelError("calibration is not for the 02:00 channel");
    if (!pm_calib.pm_model || !am_calib.am_model) {
        throw ModelError("02:00 forecast needs both channel calibrations");
    }
    if (x_new.size() != ingest::kPredictorCount) {
        throw DataError("new case must supply " + std::to_string(ingest::kPredictorCount) +
                        " predictors");
    }
    const double point_pm = pm_calib.pm_model->predict(x_new);
    const smoother::LoessPrediction pred = am_calib.am_model->predict(point_pm);
    ForecastInterval interval = interval_from_scores(am_calib, pred.value, alpha);
    interval.extrapolated = pred.extrapolated;
    return interval;
}

std::vector<double> bonferroni_adjust(const std::vector<double>& alphas, double global_alpha) {
    if (alphas.empty()) throw ConfigError("no coverage levels to adjust");
    if (!(global_alpha > 0.0 && global_alpha < 1.0)) {
        throw ConfigError("global alpha must lie in (0, 1)");
    }
    return std::vector<double>(alphas.size(),
                               global_alpha / static_cast<double>(alphas.size()));
}

double ExceedanceEstimate::value() const {
    if (!determinate) throw ModelError("exceedance probability is only bounded, not determined");
    return lower;
}

ExceedanceEstimate lower_bound_exceedance(const ForecastInterval& interval, double threshold) {
    ExceedanceEstimate est;
    const double half_tail = interval.alpha / 2.0;
    if (threshold <= interval.lower) {
        est.lower = est.upper = 1.0 - half_tail;
        est.determinate = true;
    } else if (threshold > interval.upper) {
        est.lower = est.upper = half_tail;
        est.determinate = true;
    } else {
        est.lower = half_tail;
        est.upper = 1.0 - half_tail;
        est.determinate = false;
    }
    return est;
}

void write_intervals_csv(std::span<const ForecastInterval> intervals, std::ostream& out) {
    csv::write_row(out,
                   {"t_index", "date", "channel", "alpha", "point", "lower", "upper",
                    "extrapolated", "validity_warning"},
                   ',');
    for (const ForecastInterval& iv : intervals) {
        csv::write_row(out,
                       {std::to_string(iv.t_index),
                        iv.date ? format_iso_date(*iv.date) : std::string(),
                        channel_name(iv.channel), csv::format_double(iv.alpha),
                        csv::format_double(iv.point), csv::format_double(iv.lower),
                        csv::format_double(iv.upper), iv.extrapolated ? "true" : "false",
                        iv.validity_warning ? "true" : "false"},
                       ',');
    }
}

std::vector<ForecastInterval> read_intervals_csv(std::istream& in) {
    const csv::Table table = csv::read_delimited(in, ',');
    const std::vector<std::string> expected = {"t_index", "date",  "channel",
                                               "alpha",   "point", "lower",
                                               "upper",   "extrapolated", "validity_warning"};
    if (table.header != expected) throw DataError("not an interval CSV (header mismatch)");
    std::vector<ForecastInterval> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != expected.size()) throw DataError("interval CSV row with wrong field count");
        ForecastInterval iv;
        iv.t_index = static_cast<int>(csv::parse_long(row[0]));
        if (!row[1].empty()) iv.date = parse_iso_date(row[1]);
        if (row[2] == "PM") {
            iv.channel = Channel::PM;
        } else if (row[2] == "AM") {
            iv.channel = Channel::AM;
        } else {
            throw DataError("unknown channel '" + row[2] + "'");
        }
        iv.alpha = csv::parse_double(row[3]);
        iv.point = csv::parse_double(row[4]);
        iv.lower = csv::parse_double(row[5]);
        iv.upper = csv::parse_double(row[6]);
        iv.extrapolated = row[7] == "true";
        iv.validity_warning = row[8] == "true";
        out.push_back(iv);
    }
    return out;
}

nlohmann::json ChannelCalibration::to_json() const {
    nlohmann::json j{
        {"version", 1},
        {"channel", channel_name(channel)},
        {"score_predictor_kind", score_predictor_name(score_predictor_kind)},
        {"scores", scores},
        {"score_predictors", score_predictors},
        {"score_model", score_model.to_json()},
        {"raw_whiteness", whiteness_to_json(raw_whiteness)},
        {"whiteness", whiteness_to_json(whiteness)},
        {"validity_warning", validity_warning},
        {"calibrated", calibrated},
        {"holdout_scores", holdout_scores},
        {"holdout_predictors", holdout_predictors},
    };
    if (ar1) {
        j["ar1"] = {{"phi", ar1->phi},
                    {"intercept", ar1->intercept},
                    {"residual_variance", ar1->residual_variance},
                    {"stationary", ar1->stationary}};
    } else {
        j["ar1"] = nullptr;
    }
    return j;
}

ChannelCalibration ChannelCalibration::from_json(const nlohmann::json& j) {
    ChannelCalibration calib;
    const std::string ch = j.at("channel").get<std::string>();
    if (ch == "PM") {
        calib.channel = Channel::PM;
    } else if (ch == "AM") {
        calib.channel = Channel::AM;
    } else {
        throw DataError("unknown channel '" + ch + "' in calibration document");
    }
    calib.score_predictor_kind =
        parse_score_predictor(j.at("score_predictor_kind").get<std::string>());
    calib.scores = j.at("scores").get<std::vector<double>>();
    calib.score_predictors = j.at("score_predictors").get<std::vector<double>>();
    calib.score_model = forest::Forest::from_json(j.at("score_model"));
    calib.raw_whiteness = whiteness_from_json(j.at("raw_whiteness"));
    calib.whiteness = whiteness_from_json(j.at("whiteness"));
    calib.validity_warning = j.at("validity_warning").get<bool>();
    calib.calibrated = j.at("calibrated").get<bool>();
    calib.holdout_scores = j.at("holdout_scores").get<std::vector<double>>();
    calib.holdout_predictors = j.at("holdout_predictors").get<std::vector<double>>();
    if (!j.at("ar1").is_null()) {
        tsdiag::Ar1Fit fit;
        fit.phi = j.at("ar1").at("phi").get<double>();
        fit.intercept = j.at("ar1").at("intercept").get<double>();
        fit.residual_variance = j.at("ar1").at("residual_variance").get<double>();
        fit.stationary = j.at("ar1").at("stationary").get<bool>();
        calib.ar1 = fit;
    }
    return calib;
}

}  // namespace heatcast::conformal
