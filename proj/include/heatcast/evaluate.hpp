#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "heatcast/conformal.hpp"
#include "heatcast/ingest.hpp"

namespace heatcast::evaluate {

enum class Subset { All, TopDecileByForecast };

struct IntervalSummary {
    conformal::Channel channel = conformal::Channel::PM;
    double alpha = 0.1;
    Subset subset = Subset::All;
    std::size_t n = 0;
    double min_len = 0.0;
    double mean_len = 0.0;
    double max_len = 0.0;
};

/// Min/mean/max of (upper - lower), optionally restricted to the highest 10%
/// of point forecasts (ties at the cutoff kept). Throws when the subset is
/// empty.
IntervalSummary summarize_intervals(std::span<const conformal::ForecastInterval> intervals,
                                    Subset subset);

struct AlphaCoverage {
    double alpha = 0.0;
    std::size_t n = 0;
    std::size_t covered = 0;
    double coverage = 0.0;
};

struct CoverageReport {
    std::size_t n = 0;
    std::size_t covered = 0;
    double coverage = 0.0;  ///< fraction of truths inside [lower, upper]
    std::vector<AlphaCoverage> by_alpha;
};

/// Inclusive-bounds coverage of the aligned truths; intervals and truths must
/// pair up one to one.
CoverageReport coverage_audit(std::span<const conformal::ForecastInterval> intervals,
                              std::span<const double> truths);

/// Per-day plot data: date, observed, fitted, smoothed_observed,
/// smoothed_fitted, q90_line. The two smooth columns come from loess fits of
/// each series on the day index; q90_line repeats the empirical .90 quantile
/// of the exported observed values. An optional date window restricts the
/// rows (the seasonal-subset view).
void write_fit_series_csv(const ingest::SupervisedFrame& frame, conformal::Channel channel,
                          std::span<const double> fitted, double loess_span, int loess_degree,
                          std::ostream& out,
                          std::optional<std::pair<CalendarDate, CalendarDate>> window = {});

/// Interval-length table in the fixed layout
///   Time,Min .90,Mean .90,Max .90,Min .70,Mean .70,Max .70
/// with one row per channel and values printed to one decimal place. The
/// summaries are looked up by (channel, alpha in {0.10, 0.30}).
void write_table1_csv(std::span<const IntervalSummary> summaries, std::ostream& out);

/// coverage.csv: channel, alpha, n, covered, coverage.
void write_coverage_csv(std::span<const AlphaCoverage> pm, std::span<const AlphaCoverage> am,
                        std::ostream& out);

}  // namespace heatcast::evaluate
