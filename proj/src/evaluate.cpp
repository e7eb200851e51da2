#include "heatcast/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "heatcast/csv.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/smoother.hpp"
#include "heatcast/stats.hpp"

namespace heatcast::evaluate {

IntervalSummary summarize_intervals(std::span<const conformal::ForecastInterval> intervals,
                                    Subset subset) {
    if (intervals.empty()) throw DataError("no intervals to summarize");

    std::vector<const conformal::ForecastInterval*> selected;
    selected.reserve(intervals.size());
    if (subset == Subset::TopDecileByForecast) {
        std::vector<double> points;
        points.reserve(intervals.size());
        for (const auto& iv : intervals) points.push_back(iv.point);
        std::sort(points.begin(), points.end(), std::greater<>());
        const std::size_t k = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::ceil(0.10 * static_cast<double>(points.size()) - 1e-9)));
        const double cutoff = points[k - 1];
        for (const auto& iv : intervals) {
            if (iv.point >= cutoff) selected.push_back(&iv);
        }
    } else {
        for (const auto& iv : intervals) selected.push_back(&iv);
    }
    if (selected.empty()) throw DataError("interval subset is empty");

    IntervalSummary summary;
    summary.channel = selected.front()->channel;
    summary.alpha = selected.front()->alpha;
    summary.subset = subset;
    summary.n = selected.size();
    summary.min_len = std::numeric_limits<double>::infinity();
    summary.max_len = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (const auto* iv : selected) {
        const double len = iv->upper - iv->lower;
        summary.min_len = std::min(summary.min_len, len);
        summary.max_len = std::max(summary.max_len, len);
        total += len;
    }
    summary.mean_len = total / static_cast<double>(selected.size());
    return summary;
}

CoverageReport coverage_audit(std::span<const conformal::ForecastInterval> intervals,
                              std::span<const double> truths) {
    if (intervals.size() != truths.size()) {
        throw DataError("intervals and truths must pair up one to one");
    }
    CoverageReport report;
    report.n = intervals.size();
    std::vector<AlphaCoverage> buckets;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const bool in = truths[i] >= intervals[i].lower && truths[i] <= intervals[i].upper;
        if (in) ++report.covered;
        auto it = std::find_if(buckets.begin(), buckets.end(), [&](const AlphaCoverage& b) {
            return b.alpha == intervals[i].alpha;
        });
        if (it == buckets.end()) {
            buckets.push_back({intervals[i].alpha, 0, 0, 0.0});
            it = buckets.end() - 1;
        }
        ++it->n;
        if (in) ++it->covered;
    }
    report.coverage =
        report.n == 0 ? 0.0 : static_cast<double>(report.covered) / static_cast<double>(report.n);
    std::sort(buckets.begin(), buckets.end(),
              [](const AlphaCoverage& a, const AlphaCoverage& b) { return a.alpha < b.alpha; });
    for (AlphaCoverage& b : buckets) {
        b.coverage = static_cast<double>(b.covered) / static_cast<double>(b.n);
    }
    report.by_alpha = std::move(buckets);
    return report;
}

void write_fit_series_csv(const ingest::SupervisedFrame& frame, conformal::Channel channel,
                          std::span<const double> fitted, double loess_span, int loess_degree,
                          std::ostream& out,
                          std::optional<std::pair<CalendarDate, CalendarDate>> window) {
    if (fitted.size() != frame.rows.size()) {
        throw DataError("fitted series must align with the frame rows");
    }

    const bool pm = channel == conformal::Channel::PM;
    auto observed_of = [&](const ingest::SupervisedRow& row) {
        return pm ? row.y_pm : row.y_am;
    };
    auto in_window = [&](const ingest::SupervisedRow& row) {
        if (!window) return true;
        const auto d = std::chrono::sys_days(row.date);
        return d >= std::chrono::sys_days(window->first) &&
               d <= std::chrono::sys_days(window->second);
    };

    std::vector<std::size_t> rows;
    std::vector<double> t_obs, v_obs, t_fit, v_fit;
    for (std::size_t i = 0; i < frame.rows.size(); ++i) {
        const auto& row = frame.rows[i];
        if (!in_window(row)) continue;
        rows.push_back(i);
        const double t = static_cast<double>(row.day_index);
        if (const auto obs = observed_of(row)) {
            t_obs.push_back(t);
            v_obs.push_back(*obs);
        }
        if (std::isfinite(fitted[i])) {
            t_fit.push_back(t);
            v_fit.push_back(fitted[i]);
        }
    }
    if (rows.empty()) throw DataError("no rows inside the requested date window");
    if (v_obs.empty()) throw DataError("no observed values to plot");

    const smoother::LoessModel smooth_obs =
        smoother::fit_loess(t_obs, v_obs, loess_span, loess_degree);
    std::optional<smoother::LoessModel> smooth_fit;
    if (v_fit.size() >= static_cast<std::size_t>(loess_degree) + 2) {
        smooth_fit.emplace(smoother::fit_loess(t_fit, v_fit, loess_span, loess_degree));
    }
    const double q90 = stats::empirical_quantile(v_obs, 0.9);

    csv::write_row(out, {"date", "observed", "fitted", "smoothed_observed", "smoothed_fitted",
                         "q90_line"},
                   ',');
    for (std::size_t i : rows) {
        const auto& row = frame.rows[i];
        const double t = static_cast<double>(row.day_index);
        const auto obs = observed_of(row);
        csv::write_row(out,
                       {format_iso_date(row.date),
                        obs ? csv::format_double(*obs) : std::string(),
                        std::isfinite(fitted[i]) ? csv::format_double(fitted[i]) : std::string(),
                        csv::format_double(smooth_obs.predict(t).value),
                        smooth_fit ? csv::format_double(smooth_fit->predict(t).value)
                                   : std::string(),
                        csv::format_double(q90)},
                       ',');
    }
}

namespace {

std::string one_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

const IntervalSummary* find_summary(std::span<const IntervalSummary> summaries,
                                    conformal::Channel channel, double alpha) {
    for (const IntervalSummary& s : summaries) {
        if (s.channel == channel && std::abs(s.alpha - alpha) < 1e-12) return &s;
    }
    return nullptr;
}

}  // namespace

void write_table1_csv(std::span<const IntervalSummary> summaries, std::ostream& out) {
    csv::write_row(out, {"Time", "Min .90", "Mean .90", "Max .90", "Min .70", "Mean .70",
                         "Max .70"},
                   ',');
    const conformal::Channel channels[] = {conformal::Channel::PM, conformal::Channel::AM};
    const char* labels[] = {"2PM", "2AM"};
    for (int c = 0; c < 2; ++c) {
        std::vector<std::string> fields = {labels[c]};
        for (double alpha : {0.10, 0.30}) {
            const IntervalSummary* s = find_summary(summaries, channels[c], alpha);
            if (!s) throw DataError("missing interval summary for the table layout");
            fields.push_back(one_decimal(s->min_len));
            fields.push_back(one_decimal(s->mean_len));
            fields.push_back(one_decimal(s->max_len));
        }
        csv::write_row(out, fields, ',');
    }
}

void write_coverage_csv(std::span<const AlphaCoverage> pm, std::span<const AlphaCoverage> am,
                        std::ostream& out) {
    csv::write_row(out, {"channel", "alpha", "n", "covered", "coverage"}, ',');
    auto emit = [&](const char* label, std::span<const AlphaCoverage> rows) {
        for (const AlphaCoverage& r : rows) {
            csv::write_row(out,
                           {label, csv::format_double(r.alpha), std::to_string(r.n),
                            std::to_string(r.covered), csv::format_double(r.coverage)},
                           ',');
        }
    };
    emit("PM", pm);
    emit("AM", am);
}

}  // namespace heatcast::evaluate
