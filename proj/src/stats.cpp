#include "heatcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "heatcast/errors.hpp"

namespace heatcast::stats {

namespace {

void check_quantile_args(std::span<const double> values, double q) {
    if (values.empty()) throw DataError("quantile of an empty sample");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
}

}  // namespace

double empirical_quantile(std::span<const double> values, double q) {
    check_quantile_args(values, q);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = 1.0 + q * static_cast<double>(n - 1);  // 1-based position
    const auto lo = static_cast<std::size_t>(h);
    if (lo >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

double lower_quantile(std::span<const double> values, double q) {
    check_quantile_args(values, q);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    // k = ceil(n*q), guarded against the product rounding just above an integer
    auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * q - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);
    return sorted[k - 1];
}

double mean(std::span<const double> values) {
    if (values.empty()) throw DataError("mean of an empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(n);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile level must lie in (0, 1)");

    // Acklam's approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double u = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double u = p - 0.5;
        const double r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double u = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }

    // One Halley refinement using the exact CDF via erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

}  // namespace heatcast::stats
