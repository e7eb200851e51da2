#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "heatcast/errors.hpp"
#include "heatcast/stats.hpp"
#include "heatcast/synth.hpp"
#include "heatcast/tsdiag.hpp"

using namespace heatcast;

namespace {

std::vector<double> pm_series(const ingest::SupervisedFrame& frame) {
    std::vector<double> y;
    y.reserve(frame.rows.size());
    for (const auto& row : frame.rows) y.push_back(*row.y_pm);
    return y;
}

/// Recovers the standardized noise path u_t = (y_t - mu_t) / sigma_t.
std::vector<double> noise_path(const ingest::SupervisedFrame& frame,
                               const synth::QuantileOracle& oracle) {
    std::vector<double> u;
    u.reserve(frame.rows.size());
    for (std::size_t i = 0; i < frame.rows.size(); ++i) {
        u.push_back((*frame.rows[i].y_pm - oracle.pm_mean[i]) / oracle.pm_sd[i]);
    }
    return u;
}

double lag1_autocorr(const std::vector<double>& x) {
    const double m = stats::mean(x);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - m) * (x[t] - m);
        if (t + 1 < x.size()) num += (x[t] - m) * (x[t + 1] - m);
    }
    return num / den;
}

}  // namespace

TEST_CASE("generation is deterministic in spec and seed") {
    synth::ScenarioSpec s;
    s.train_days = 40;
    s.test_days = 35;
    const auto a = synth::synth_generate(s, 404);
    const auto b = synth::synth_generate(s, 404);
    const auto c = synth::synth_generate(s, 405);

    REQUIRE(a.train.rows.size() == 40);
    REQUIRE(a.test.rows.size() == 35);
    CHECK(pm_series(a.train) == pm_series(b.train));
    CHECK(pm_series(a.test) == pm_series(b.test));
    CHECK(a.train_oracle.pm_mean == b.train_oracle.pm_mean);
    CHECK(a.train_oracle.pm_sd == b.train_oracle.pm_sd);
    CHECK(*a.train.rows[0].predictors == *b.train.rows[0].predictors);

    CHECK(pm_series(a.train) != pm_series(c.train));

    // Train and test years are independent substreams of the same seed.
    CHECK((*a.train.rows[0].predictors)[0] != (*a.test.rows[0].predictors)[0]);
}

TEST_CASE("frames are fully wired supervised years") {
    synth::ScenarioSpec s;
    s.train_days = 50;
    s.test_days = 30;
    const auto data = synth::synth_generate(s, 7);
    const auto& f = data.train;

    CHECK(f.lag_days == 0);
    CHECK(f.start_date == s.train_start);
    CHECK(f.end_date == add_days(s.train_start, 49));
    CHECK(f.complete_rows().size() == 50);
    REQUIRE(data.train_oracle.pm_mean.size() == 50);
    REQUIRE(data.train_oracle.am_mean.size() == 50);

    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& row = f.rows[i];
        const int t = static_cast<int>(i) + 1;
        CHECK(row.day_index == t);
        CHECK(row.day_counter == t);
        CHECK(row.date == add_days(s.train_start, t - 1));
        REQUIRE(row.predictors.has_value());
        CHECK((*row.predictors)[7] == static_cast<double>(t));
        CHECK(row.y_pm.has_value());
        CHECK(row.y_am.has_value() == (t > 1));  // no previous 14:00 on day 1
    }
    CHECK(std::isnan(data.train_oracle.am_mean[0]));
    CHECK(std::isnan(data.train_oracle.am_sd[0]));
}

TEST_CASE("with all noise removed the paths sit exactly on the oracle means") {
    synth::ScenarioSpec s;
    s.noise_scale = 0.0;
    s.am_noise = 0.0;
    s.train_days = 60;
    s.test_days = 30;
    const auto data = synth::synth_generate(s, 99);
    const auto& f = data.train;
    const auto& oracle = data.train_oracle;

    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        CHECK(*f.rows[i].y_pm == oracle.pm_mean[i]);
        CHECK(oracle.pm_sd[i] == 0.0);
        if (i > 0) {
            CHECK(*f.rows[i].y_am == oracle.am_mean[i]);
            CHECK(oracle.am_sd[i] == 0.0);
        }
    }

    SUBCASE("the mean structure matches the stated law") {
        for (std::size_t i = 0; i < f.rows.size(); ++i) {
            const double t = static_cast<double>(i);
            const double x3 = (*f.rows[i].predictors)[2];
            const double mu = s.base + s.trend * t / 59.0 +
                              s.seasonal_amp * std::sin(2.0 * M_PI * t / s.seasonal_period) +
                              s.temp_effect * (x3 - 15.0);
            CHECK(oracle.pm_mean[i] == doctest::Approx(mu).epsilon(1e-12));
            if (i > 0) {
                CHECK(oracle.am_mean[i] ==
                      doctest::Approx(s.am_base + s.am_carryover * oracle.pm_mean[i - 1])
                          .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("oracle quantiles are the conditional normal quantiles") {
    synth::ScenarioSpec s;
    s.train_days = 40;
    s.test_days = 30;
    const auto data = synth::synth_generate(s, 13);
    const auto& oracle = data.train_oracle;

    const double z90 = stats::normal_quantile(0.9);
    for (std::size_t i : {0u, 7u, 39u}) {
        CHECK(oracle.pm_quantile(i, 0.9) == oracle.pm_mean[i] + oracle.pm_sd[i] * z90);
        CHECK(oracle.pm_quantile(i, 0.5) == oracle.pm_mean[i]);
        // Hetero scaling: sigma = noise_scale * exp(hetero * (x3 - 15) / 5).
        const double x3 = (*data.train.rows[i].predictors)[2];
        CHECK(oracle.pm_sd[i] ==
              doctest::Approx(s.noise_scale * std::exp(s.hetero * (x3 - 15.0) / 5.0))
                  .epsilon(1e-12));
    }
    for (std::size_t i : {1u, 20u}) {
        CHECK(oracle.am_quantile(i, 0.9) == oracle.am_mean[i] + oracle.am_sd[i] * z90);
        const double sd = std::sqrt(s.am_carryover * s.am_carryover * oracle.pm_sd[i - 1] *
                                        oracle.pm_sd[i - 1] +
                                    s.am_noise * s.am_noise);
        CHECK(oracle.am_sd[i] == doctest::Approx(sd).epsilon(1e-12));
    }
}

TEST_CASE("the 02:00 response carries over the previous 14:00 value") {
    synth::ScenarioSpec s;
    s.am_noise = 0.0;
    s.am_base = 3.0;
    s.am_carryover = 0.5;
    s.train_days = 40;
    s.test_days = 30;
    const auto data = synth::synth_generate(s, 17);
    const auto& f = data.train;
    for (std::size_t i = 1; i < f.rows.size(); ++i) {
        CHECK(*f.rows[i].y_am ==
              doctest::Approx(3.0 + 0.5 * *f.rows[i - 1].y_pm).epsilon(1e-13));
    }
}

TEST_CASE("the standardized noise keeps unit variance and the requested memory") {
    synth::ScenarioSpec s;
    s.train_days = 2000;
    s.test_days = 30;

    SUBCASE("independent noise") {
        s.phi = 0.0;
        const auto data = synth::synth_generate(s, 7);
        const auto u = noise_path(data.train, data.train_oracle);
        CHECK(std::abs(stats::mean(u)) < 0.08);
        CHECK(std::abs(stats::variance(u) - 1.0) < 0.1);
        CHECK(std::abs(lag1_autocorr(u)) < 0.05);
        CHECK(tsdiag::whiteness_test(u, 20, 0).pass);
    }

    SUBCASE("persistent noise") {
        s.phi = 0.6;
        const auto data = synth::synth_generate(s, 7);
        const auto u = noise_path(data.train, data.train_oracle);
        CHECK(std::abs(stats::variance(u) - 1.0) < 0.15);
        CHECK(std::abs(lag1_autocorr(u) - 0.6) < 0.06);
        CHECK_FALSE(tsdiag::whiteness_test(u, 20, 0).pass);
    }
}

TEST_CASE("scenario validation rejects unusable parameters") {
    synth::ScenarioSpec s;

    SUBCASE("window too short") {
        s.train_days = 29;
        CHECK_THROWS_AS(s.validate(), ConfigError);
        CHECK_THROWS_AS(synth::synth_generate(s, 1), ConfigError);
    }
    SUBCASE("unit-root noise") {
        s.phi = 1.0;
        CHECK_THROWS_AS(s.validate(), ConfigError);
    }
    SUBCASE("negative noise scale") {
        s.noise_scale = -1.0;
        CHECK_THROWS_AS(s.validate(), ConfigError);
    }
    SUBCASE("degenerate seasonal period") {
        s.seasonal_period = 0.0;
        CHECK_THROWS_AS(s.validate(), ConfigError);
    }
    SUBCASE("non-finite coefficient") {
        s.temp_effect = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(s.validate(), ConfigError);
    }
}
