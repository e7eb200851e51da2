#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace heatcast::tsdiag {

/// First-order autoregression y_t = intercept + phi * y_{t-1} + e_t fitted by
/// conditional least squares on the n-1 consecutive pairs.
struct Ar1Fit {
    double phi = 0.0;
    double intercept = 0.0;
    /// Residuals e_t for t = 2..n; always one shorter than the input.
    std::vector<double> residuals;
    std::size_t n_used = 0;  ///< residuals.size().
    double residual_variance = 0.0;
    bool stationary = true;  ///< |phi| < 1; a false value is a warning, not an error.
};

Ar1Fit fit_ar1(std::span<const double> series);

/// Residuals e_t = y_t - intercept - phi * y_{t-1}; output is one shorter than
/// the input.
std::vector<double> ar1_residuals(std::span<const double> series, const Ar1Fit& fit);

struct WhitenessResult {
    double statistic = 0.0;   ///< Ljung-Box Q over the requested lags.
    double p_value = 1.0;     ///< Upper tail of chi-square with `df` degrees.
    std::size_t lags = 0;
    std::size_t df = 0;       ///< lags minus the fitted parameter count.
    bool pass = false;        ///< p_value > 0.05.
    std::vector<double> autocorrelations;  ///< rho_1 .. rho_lags.

    double lag1_autocorr() const { return autocorrelations.empty() ? 0.0 : autocorrelations[0]; }
};

/// Default lag count for a series of length n: min(20, n / 5), at least 1.
std::size_t default_whiteness_lags(std::size_t n);

/// Ljung-Box portmanteau test against the null of white noise.
/// `fitted_params` is the number of parameters estimated from the same series
/// (0 for a raw series, 1 after AR(1) whitening); it is subtracted from the
/// degrees of freedom.
WhitenessResult whiteness_test(std::span<const double> series, std::size_t max_lag,
                               std::size_t fitted_params = 1);

/// Result of the score-whitening pass. When the raw series already tests
/// white, `scores` is the input unchanged and `model` is absent; otherwise
/// `scores` holds AR(1) residuals. `report.pass == false` after whitening
/// means first-order filtering was insufficient and the scores are still
/// serially dependent; downstream must surface that as a validity warning.
struct WhitenOutcome {
    std::vector<double> scores;
    std::optional<Ar1Fit> model;
    WhitenessResult raw_report;  ///< Test of the input series (no fitted params).
    WhitenessResult report;      ///< Test of the returned scores.
};

WhitenOutcome whiten(std::span<const double> series);

/// Upper tail P(X > x) for a chi-square variable with df degrees of freedom.
double chi_squared_upper_tail(double x, std::size_t df);

/// Sample autocorrelation at the given lag, normalised by the lag-0
/// autocovariance around the sample mean.
double autocorrelation(std::span<const double> series, std::size_t lag);

}  // namespace heatcast::tsdiag
