#include "heatcast/tsdiag.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "heatcast/errors.hpp"

namespace heatcast::tsdiag {

namespace {

/// Regularized lower incomplete gamma P(a, x) by series expansion; converges
/// quickly for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction;
/// converges quickly for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi_squared_upper_tail(double x, std::size_t df) {
    if (df == 0) throw ConfigError("chi-square needs at least one degree of freedom");
    if (std::isnan(x)) throw DataError("chi-square statistic is NaN");
    if (x <= 0.0) return 1.0;
    const double a = static_cast<double>(df) / 2.0;
    const double half_x = x / 2.0;
    if (half_x < a + 1.0) return 1.0 - gamma_p_series(a, half_x);
    return gamma_q_cf(a, half_x);
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
    const std::size_t n = series.size();
    if (lag >= n) throw ConfigError("autocorrelation lag must be smaller than the series length");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw DataError("autocorrelation of a constant series is undefined");
    double num = 0.0;
    for (std::size_t t = lag; t < n; ++t) {
        num += (series[t] - mean) * (series[t - lag] - mean);
    }
    return num / denom;
}

Ar1Fit fit_ar1(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 20) throw DataError("AR(1) fit needs at least 20 observations");

    // Least squares of y_t on (1, y_{t-1}) over t = 2..n.
    const std::size_t m = n - 1;
    double sx = 0.0, sy = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        sx += series[t - 1];
        sy += series[t];
    }
    const double mx = sx / static_cast<double>(m);
    const double my = sy / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double dx = series[t - 1] - mx;
        sxx += dx * dx;
        sxy += dx * (series[t] - my);
    }
    if (sxx == 0.0) throw DataError("AR(1) fit is degenerate: lagged series is constant");

    Ar1Fit fit;
    fit.phi = sxy / sxx;
    fit.intercept = my - fit.phi * mx;
    fit.stationary = std::abs(fit.phi) < 1.0;
    fit.residuals.reserve(m);
    double rss = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double e = series[t] - fit.intercept - fit.phi * series[t - 1];
        fit.residuals.push_back(e);
        rss += e * e;
    }
    fit.n_used = m;
    fit.residual_variance = rss / static_cast<double>(m);
    return fit;
}

std::vector<double> ar1_residuals(std::span<const double> series, const Ar1Fit& fit) {
    if (series.size() < 2) throw DataError("whitening needs at least 2 observations");
    std::vector<double> out;
    out.reserve(series.size() - 1);
    for (std::size_t t = 1; t < series.size(); ++t) {
        out.push_back(series[t] - fit.intercept - fit.phi * series[t - 1]);
    }
    return out;
}

std::size_t default_whiteness_lags(std::size_t n) {
    return std::max<std::size_t>(1, std::min<std::size_t>(20, n / 5));
}

WhitenessResult whiteness_test(std::span<const double> series, std::size_t max_lag,
                               std::size_t fitted_params) {
    const std::size_t n = series.size();
    if (max_lag == 0) throw ConfigError("whiteness test needs at least one lag");
    if (max_lag >= n) throw DataError("whiteness test lag count must be below the series length");
    if (fitted_params >= max_lag) {
        throw ConfigError("whiteness test needs more lags than fitted parameters");
    }

    WhitenessResult result;
    result.lags = max_lag;
    result.df = max_lag - fitted_params;
    result.autocorrelations.reserve(max_lag);

    const double dn = static_cast<double>(n);
    double q = 0.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        const double rho = autocorrelation(series, k);
        result.autocorrelations.push_back(rho);
        q += rho * rho / (dn - static_cast<double>(k));
    }
    result.statistic = dn * (dn + 2.0) * q;
    result.p_value = chi_squared_upper_tail(result.statistic, result.df);
    result.pass = result.p_value > 0.05;
    return result;
}

WhitenOutcome whiten(std::span<const double> series) {
    WhitenOutcome out;
    const bool constant =
        std::adjacent_find(series.begin(), series.end(), std::not_equal_to<>()) == series.end();
    if (constant) {
        // A constant score series (e.g. zero residuals) carries no dependence
        // to test or remove.
        out.scores.assign(series.begin(), series.end());
        out.raw_report.lags = default_whiteness_lags(series.size());
        out.raw_report.df = out.raw_report.lags;
        out.raw_report.p_value = 1.0;
        out.raw_report.pass = true;
        out.report = out.raw_report;
        return out;
    }
    out.raw_report = whiteness_test(series, default_whiteness_lags(series.size()), 0);
    if (out.raw_report.pass) {
        out.scores.assign(series.begin(), series.end());
        out.report = out.raw_report;
        return out;
    }
    Ar1Fit fit = fit_ar1(series);
    out.scores = fit.residuals;
    out.report = whiteness_test(out.scores, default_whiteness_lags(out.scores.size()), 1);
    out.model = std::move(fit);
    return out;
}

}  // namespace heatcast::tsdiag
