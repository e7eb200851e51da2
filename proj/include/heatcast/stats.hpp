#pragma once

#include <span>
#include <vector>

namespace heatcast::stats {

/// Sample quantile by linear interpolation between order statistics at
/// position 1 + q*(n-1). Deterministic; monotone in q; shift-equivariant.
/// Throws DataError on empty input, ConfigError for q outside (0, 1).
double empirical_quantile(std::span<const double> values, double q);

/// Left-continuous generalized inverse of the empirical CDF: the smallest
/// order statistic whose cumulative fraction reaches q. Unlike the
/// interpolated quantile this is always a minimizer of the check loss,
/// which is what the boosting leaf update needs.
double lower_quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

/// Sample variance (denominator n); 0 for n < 2.
double variance(std::span<const double> values);

/// Standard normal quantile function. Acklam's rational approximation
/// polished with one Halley step against erfc; |error| < 1e-13 on (0,1).
double normal_quantile(double p);

}  // namespace heatcast::stats
