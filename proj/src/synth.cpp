#include "heatcast/synth.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/stats.hpp"

namespace heatcast::synth {

void ScenarioSpec::validate() const {
    if (train_days < 30 || test_days < 30) {
        throw ConfigError("scenario needs at least 30 train and test days");
    }
    if (!(std::abs(phi) < 1.0)) throw ConfigError("noise phi must satisfy |phi| < 1");
    if (noise_scale < 0.0 || am_noise < 0.0) throw ConfigError("noise scales must be >= 0");
    if (seasonal_period <= 0.0) throw ConfigError("seasonal period must be positive");
    if (!(std::isfinite(base) && std::isfinite(trend) && std::isfinite(seasonal_amp) &&
          std::isfinite(temp_effect) && std::isfinite(hetero) && std::isfinite(am_base) &&
          std::isfinite(am_carryover))) {
        throw ConfigError("scenario parameters must be finite");
    }
}

double QuantileOracle::pm_quantile(std::size_t row, double tau) const {
    return pm_mean.at(row) + pm_sd.at(row) * stats::normal_quantile(tau);
}

double QuantileOracle::am_quantile(std::size_t row, double tau) const {
    return am_mean.at(row) + am_sd.at(row) * stats::normal_quantile(tau);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

void generate_year(const ScenarioSpec& spec, int days, CalendarDate start,
                   std::uint64_t year_seed, ingest::SupervisedFrame& frame,
                   QuantileOracle& oracle) {
    auto engine = make_engine(year_seed);
    std::uniform_real_distribution<double> wind_dir(0.0, 360.0);
    std::normal_distribution<double> wind_speed(4.0, 2.0);
    std::normal_distribution<double> air_temp(15.0, 5.0);
    std::normal_distribution<double> pressure(1013.0, 8.0);
    std::uniform_real_distribution<double> visibility(5000.0, 20000.0);
    std::normal_distribution<double> dew_point(10.0, 4.0);
    std::uniform_real_distribution<double> humidity(30.0, 100.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    frame.lag_days = 0;
    frame.start_date = start;
    frame.end_date = add_days(start, days - 1);
    frame.rows.reserve(static_cast<std::size_t>(days));
    oracle.pm_mean.reserve(static_cast<std::size_t>(days));
    oracle.pm_sd.reserve(static_cast<std::size_t>(days));
    oracle.am_mean.reserve(static_cast<std::size_t>(days));
    oracle.am_sd.reserve(static_cast<std::size_t>(days));

    const double denom = days > 1 ? static_cast<double>(days - 1) : 1.0;
    double u_prev = 0.0;
    double y_pm_prev = 0.0;
    double mu_prev = 0.0;
    double sigma_prev = 0.0;

    for (int t = 1; t <= days; ++t) {
        ingest::SupervisedRow row;
        row.day_index = t;
        row.date = add_days(start, t - 1);
        row.day_counter = t;

        std::array<double, ingest::kPredictorCount> x{};
        x[0] = wind_dir(engine);
        x[1] = std::abs(wind_speed(engine));
        x[2] = air_temp(engine);
        x[3] = pressure(engine);
        x[4] = visibility(engine);
        x[5] = dew_point(engine);
        x[6] = humidity(engine);
        x[7] = static_cast<double>(t);
        row.predictors = x;

        const double mu = spec.base + spec.trend * static_cast<double>(t - 1) / denom +
                          spec.seasonal_amp *
                              std::sin(2.0 * kPi * static_cast<double>(t - 1) /
                                       spec.seasonal_period) +
                          spec.temp_effect * (x[2] - 15.0);
        const double sigma = spec.noise_scale * std::exp(spec.hetero * (x[2] - 15.0) / 5.0);

        // Standardized AR(1): unit marginal variance at every t, so the
        // conditional-on-x quantile stays mu + sigma * z_tau exactly.
        const double z = gauss(engine);
        const double u = t == 1 ? z : spec.phi * u_prev + std::sqrt(1.0 - spec.phi * spec.phi) * z;
        row.y_pm = mu + sigma * u;

        if (t > 1) {
            row.y_am = spec.am_base + spec.am_carryover * y_pm_prev + spec.am_noise * gauss(engine);
            oracle.am_mean.push_back(spec.am_base + spec.am_carryover * mu_prev);
            oracle.am_sd.push_back(std::sqrt(spec.am_carryover * spec.am_carryover * sigma_prev *
                                                 sigma_prev +
                                             spec.am_noise * spec.am_noise));
        } else {
            oracle.am_mean.push_back(std::numeric_limits<double>::quiet_NaN());
            oracle.am_sd.push_back(std::numeric_limits<double>::quiet_NaN());
        }

        oracle.pm_mean.push_back(mu);
        oracle.pm_sd.push_back(sigma);

        u_prev = u;
        y_pm_prev = *row.y_pm;
        mu_prev = mu;
        sigma_prev = sigma;
        frame.rows.push_back(row);
    }
}

}  // namespace

SynthData synth_generate(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    SynthData data;
    generate_year(spec, spec.train_days, spec.train_start, derive_seed(seed, "synth_train"),
                  data.train, data.train_oracle);
    generate_year(spec, spec.test_days, spec.test_start, derive_seed(seed, "synth_test"),
                  data.test, data.test_oracle);
    return data;
}

}  // namespace heatcast::synth
