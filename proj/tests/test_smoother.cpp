#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "heatcast/errors.hpp"
#include "heatcast/ingest.hpp"
#include "heatcast/smoother.hpp"

using namespace heatcast;

namespace {

// Direct tricube-weighted least-squares solve, written against the documented
// conventions: neighborhood of the ceil(span*n) nearest points with distance
// ties included, weights (1 - u^3)^3 on u = dist/d_max, polynomial basis
// centered at the query. Long-double Cramer-style elimination keeps it
// independent of the production solver.
double direct_tricube_wls(const std::vector<double>& x, const std::vector<double>& y,
                          double span, int degree, double x0) {
    const std::size_t n = x.size();
    auto k = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n) - 1e-9));
    k = std::min(std::max<std::size_t>(k, static_cast<std::size_t>(degree) + 1), n);

    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(x[i] - x0);
    std::vector<double> sorted(dist);
    std::sort(sorted.begin(), sorted.end());
    const double d_max = sorted[k - 1];

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] <= d_max) members.push_back(i);
    }

    const double scale = d_max > 0.0 ? d_max : 1.0;
    const int dim = degree + 1;
    long double a[3][3] = {};
    long double rhs[3] = {};
    for (std::size_t m : members) {
        const long double u = (x[m] - x0) / scale;
        long double w;
        if (d_max == 0.0) {
            w = 1.0L;
        } else {
            const long double au = u < 0 ? -u : u;
            const long double t = 1.0L - au * au * au;
            w = t * t * t;
        }
        long double basis[3] = {1.0L, u, u * u};
        for (int r = 0; r < dim; ++r) {
            for (int col = 0; col < dim; ++col) a[r][col] += w * basis[r] * basis[col];
            rhs[r] += w * basis[r] * static_cast<long double>(y[m]);
        }
    }
    // Gaussian elimination with partial pivoting in long double.
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r) {
            if (std::abs(static_cast<double>(a[perm[r]][col])) >
                std::abs(static_cast<double>(a[perm[pivot]][col]))) {
                pivot = r;
            }
        }
        std::swap(perm[col], perm[pivot]);
        for (int r = col + 1; r < dim; ++r) {
            const long double f = a[perm[r]][col] / a[perm[col]][col];
            for (int c2 = col; c2 < dim; ++c2) a[perm[r]][c2] -= f * a[perm[col]][c2];
            rhs[perm[r]] -= f * rhs[perm[col]];
        }
    }
    long double beta[3] = {};
    for (int col = dim - 1; col >= 0; --col) {
        long double s = rhs[perm[col]];
        for (int c2 = col + 1; c2 < dim; ++c2) s -= a[perm[col]][c2] * beta[c2];
        beta[col] = s / a[perm[col]][col];
    }
    return static_cast<double>(beta[0]);
}

struct NoisyQuadratic {
    std::vector<double> x;
    std::vector<double> y;
};

NoisyQuadratic make_noisy_quadratic(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    NoisyQuadratic d;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = static_cast<double>(i) / static_cast<double>(n - 1) * 10.0;
        d.x.push_back(xi);
        d.y.push_back(0.5 * xi * xi - 3.0 * xi + 2.0 + noise(gen));
    }
    return d;
}

ingest::SupervisedFrame tiny_frame(int days) {
    ingest::SupervisedFrame frame;
    frame.lag_days = 0;
    frame.start_date = parse_iso_date("2020-04-01");
    frame.end_date = add_days(frame.start_date, days - 1);
    for (int t = 0; t < days; ++t) {
        ingest::SupervisedRow row;
        row.day_index = t + 1;
        row.day_counter = t + 1;
        row.date = add_days(frame.start_date, t);
        row.y_pm = 20.0 + t;
        row.y_am = 10.0 + t;
        frame.rows.push_back(row);
    }
    return frame;
}

}  // namespace

TEST_CASE("exactly linear data is reproduced for any span and degree") {
    std::vector<double> x, y;
    for (int i = 0; i < 25; ++i) {
        x.push_back(0.4 * i);
        y.push_back(2.0 * x.back() - 1.0);
    }
    for (double span : {0.3, 0.75, 1.0}) {
        for (int degree : {1, 2}) {
            const auto model = smoother::fit_loess(x, y, span, degree);
            for (double xi : x) {
                CHECK(model.predict(xi).value == doctest::Approx(2.0 * xi - 1.0).epsilon(1e-8));
                CHECK_FALSE(model.predict(xi).extrapolated);
            }
        }
    }
}

TEST_CASE("constant response smooths to the constant") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y(6, 7.0);
    const auto model = smoother::fit_loess(x, y, 0.75, 2);
    for (double q = 0.0; q <= 7.0; q += 0.5) {
        CHECK(model.predict(q).value == doctest::Approx(7.0).epsilon(1e-10));
    }
}

TEST_CASE("noisy quadratic matches the direct weighted least squares oracle") {
    const auto d = make_noisy_quadratic(20, 2024);
    const auto model = smoother::fit_loess(d.x, d.y, 0.75, 2);

    SUBCASE("at every training point") {
        const auto fitted = model.fitted_values();
        REQUIRE(fitted.size() == 20);
        for (std::size_t i = 0; i < d.x.size(); ++i) {
            const double oracle = direct_tricube_wls(d.x, d.y, 0.75, 2, d.x[i]);
            CHECK(model.predict(d.x[i]).value == doctest::Approx(oracle).epsilon(1e-8));
            CHECK(fitted[i] == doctest::Approx(oracle).epsilon(1e-8));
        }
    }

    SUBCASE("at interior query points") {
        for (double x0 : {0.7, 2.55, 5.01, 8.4, 9.9}) {
            const double oracle = direct_tricube_wls(d.x, d.y, 0.75, 2, x0);
            CHECK(model.predict(x0).value == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("span one with degree one on linear data equals global least squares") {
    std::mt19937_64 gen(5150);
    std::normal_distribution<double> noise(0.0, 0.0);
    std::vector<double> x, y;
    for (int i = 0; i < 15; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(-0.75 * x.back() + 4.0 + noise(gen));
    }
    // Ordinary least squares on the same pairs.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;

    const auto model = smoother::fit_loess(x, y, 1.0, 1);
    for (double xi : x) {
        CHECK(model.predict(xi).value ==
              doctest::Approx(intercept + slope * xi).epsilon(1e-8));
    }
}

TEST_CASE("queries beyond the training range extend the boundary fit linearly") {
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(1.5 * x.back() + 2.0);
    }
    const auto model = smoother::fit_loess(x, y, 0.75, 1);

    const auto beyond = model.predict(15.0);
    CHECK(beyond.extrapolated);
    CHECK(beyond.value == doctest::Approx(1.5 * 15.0 + 2.0).epsilon(1e-8));

    const auto before = model.predict(-3.0);
    CHECK(before.extrapolated);
    CHECK(before.value == doctest::Approx(1.5 * -3.0 + 2.0).epsilon(1e-8));

    // The extension is continuous at the boundary and linear beyond it.
    const double at_edge = model.predict(11.0).value;
    const double step1 = model.predict(12.0).value;
    const double step2 = model.predict(13.0).value;
    CHECK(step2 - step1 == doctest::Approx(step1 - at_edge).epsilon(1e-8));
}

TEST_CASE("predictions are continuous across a fine grid") {
    const auto d = make_noisy_quadratic(30, 99);
    const auto model = smoother::fit_loess(d.x, d.y, 0.5, 2);
    const double step = 0.002;
    double prev = model.predict(0.0).value;
    double max_jump = 0.0;
    for (double x0 = step; x0 <= 10.0; x0 += step) {
        const double cur = model.predict(x0).value;
        max_jump = std::max(max_jump, std::abs(cur - prev));
        prev = cur;
    }
    // Local slope of the underlying quadratic stays below |x| = 10 - 3 = 7;
    // allow 10x of slope * step for the weight churn at window changes.
    CHECK(max_jump < 10.0 * step * 7.0);
}

TEST_CASE("duplicate x values keep the fit defined via the degree fallback") {
    std::vector<double> x{1, 1, 1, 2, 2, 3, 3, 3, 4, 5};
    std::vector<double> y{2, 2.1, 1.9, 3, 3.2, 4.1, 3.9, 4, 5.2, 6.1};
    const auto model = smoother::fit_loess(x, y, 0.4, 2);
    for (double q : {1.0, 2.5, 4.0, 5.0}) {
        CHECK(std::isfinite(model.predict(q).value));
    }
}

TEST_CASE("constructor contracts") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(smoother::fit_loess(x, std::vector<double>{1.0}, 0.75, 2), DataError);
    CHECK_THROWS_AS(smoother::fit_loess(x, y, 0.0, 2), ConfigError);
    CHECK_THROWS_AS(smoother::fit_loess(x, y, 1.1, 2), ConfigError);
    CHECK_THROWS_AS(smoother::fit_loess(x, y, 0.75, 3), ConfigError);
    CHECK_THROWS_AS(smoother::fit_loess(x, y, 0.75, 0), ConfigError);
    // Five points but only three distinct x values cannot support degree 2.
    std::vector<double> dup_x{1, 1, 2, 2, 3};
    CHECK_THROWS_AS(smoother::fit_loess(dup_x, y, 0.75, 2), DataError);
    std::vector<double> bad_y{1, 2, std::nan(""), 4, 5};
    CHECK_THROWS_AS(smoother::fit_loess(x, bad_y, 0.75, 2), DataError);
    // Neighborhood must hold degree + 1 points.
    std::vector<double> x9{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<double> y9{1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK_THROWS_AS(smoother::fit_loess(x9, y9, 0.2, 2), ConfigError);

    const auto model = smoother::fit_loess(x, y, 0.75, 1);
    CHECK_THROWS_AS(model.predict(std::nan("")), DataError);
}

TEST_CASE("serialization round-trips the model") {
    const auto d = make_noisy_quadratic(20, 7);
    const auto model = smoother::fit_loess(d.x, d.y, 0.75, 2);
    const auto back = smoother::LoessModel::from_json(model.to_json());
    CHECK(back.span() == model.span());
    CHECK(back.degree() == model.degree());
    for (double x0 : {0.0, 3.3, 6.6, 10.0, 12.0}) {
        CHECK(back.predict(x0).value == model.predict(x0).value);
        CHECK(back.predict(x0).extrapolated == model.predict(x0).extrapolated);
    }
}

TEST_CASE("pair_am_channel pairs previous-day fits with next-day 02:00") {
    auto frame = tiny_frame(12);
    std::vector<double> fitted(12);
    for (int t = 0; t < 12; ++t) fitted[static_cast<std::size_t>(t)] = 100.0 + t;

    const auto [x, y] = smoother::pair_am_channel(frame, fitted);
    REQUIRE(x.size() == 11);  // edge loss of day one
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i] == 100.0 + static_cast<double>(i));       // fit of day t-1
        CHECK(y[i] == 10.0 + static_cast<double>(i) + 1.0);  // 02:00 of day t
    }
}

TEST_CASE("pair_am_channel drops days with missing pieces") {
    auto frame = tiny_frame(13);
    std::vector<double> fitted(13);
    for (int t = 0; t < 13; ++t) fitted[static_cast<std::size_t>(t)] = 100.0 + t;

    frame.rows[4].y_am.reset();  // the pair anchored at the day-4 fit goes
    fitted[6] = std::nan("");    // no fit -> the following day loses its pair
    const auto [x, y] = smoother::pair_am_channel(frame, fitted);
    CHECK(x.size() == 10);
    CHECK(std::count(x.begin(), x.end(), 103.0) == 0);
    CHECK(std::count(x.begin(), x.end(), 106.0) == 0);
    CHECK(std::count(x.begin(), x.end(), 104.0) == 1);  // day 5's own fit still anchors day 6
}

TEST_CASE("pair_am_channel reports the pair count when too few remain") {
    // Three complete days yield exactly two pairs, below the floor of ten;
    // the error message carries the count so the arithmetic stays visible.
    const auto frame = tiny_frame(3);
    const std::vector<double> fitted{100.0, 101.0, 102.0};
    CHECK_THROWS_WITH_AS(smoother::pair_am_channel(frame, fitted),
                         doctest::Contains("found 2"), DataError);
    CHECK_THROWS_AS(smoother::pair_am_channel(frame, std::vector<double>{1.0}), DataError);
}
