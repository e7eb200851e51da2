#pragma once

#include <cstdint>
#include <vector>

#include "heatcast/dates.hpp"
#include "heatcast/ingest.hpp"

namespace heatcast::synth {

/// Generating law for desk-scale validation data. The 14:00 response is
///   y_pm = mu(x, t) + sigma(x) * u_t,
/// with mu = base + trend * (t-1)/(T-1) + seasonal_amp * sin(2*pi*(t-1)/seasonal_period)
///        + temp_effect * (x3 - 15),
/// sigma = noise_scale * exp(hetero * (x3 - 15) / 5),
/// and u_t a standardized AR(1) (unit marginal variance for every t), so the
/// conditional-on-x tau-quantile is exactly mu + sigma * z_tau. The 02:00
/// response follows the previous day's 14:00 value:
///   y_am_t = am_base + am_carryover * y_pm_{t-1} + am_noise * v_t,
/// and is missing on day 1.
struct ScenarioSpec {
    int train_days = 200;
    int test_days = 200;
    CalendarDate train_start = CalendarDate{std::chrono::year{2020}, std::chrono::month{4},
                                            std::chrono::day{1}};
    CalendarDate test_start = CalendarDate{std::chrono::year{2021}, std::chrono::month{4},
                                           std::chrono::day{1}};

    double base = 22.0;
    double trend = 3.0;
    double seasonal_amp = 4.0;
    double seasonal_period = 120.0;
    double temp_effect = 0.8;

    double noise_scale = 1.5;
    double hetero = 0.4;   ///< log-scale slope of sigma in (x3 - 15) / 5
    double phi = 0.0;      ///< AR(1) coefficient of the standardized noise

    double am_base = 4.0;
    double am_carryover = 0.6;
    double am_noise = 1.0;

    void validate() const;
};

/// Exact conditional quantiles of the generating law, one entry per frame
/// row. AM entries are NaN-mean on day 1 (no response there).
struct QuantileOracle {
    std::vector<double> pm_mean;   ///< mu per row
    std::vector<double> pm_sd;     ///< sigma per row
    std::vector<double> am_mean;
    std::vector<double> am_sd;

    double pm_quantile(std::size_t row, double tau) const;
    double am_quantile(std::size_t row, double tau) const;
};

struct SynthData {
    ingest::SupervisedFrame train;
    ingest::SupervisedFrame test;
    QuantileOracle train_oracle;
    QuantileOracle test_oracle;
};

/// Two independent realizations of the same law (a training year and a test
/// year) plus their quantile oracles. Deterministic in (spec, seed).
SynthData synth_generate(const ScenarioSpec& spec, std::uint64_t seed);

}  // namespace heatcast::synth
