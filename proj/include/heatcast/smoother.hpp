#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "heatcast/ingest.hpp"

namespace heatcast::smoother {

struct LoessPrediction {
    double value = 0.0;
    /// True when the query point lay outside the training range and the value
    /// comes from the boundary-anchored linear extension.
    bool extrapolated = false;
};

/// Locally weighted polynomial smoother. Stores the training pairs sorted by
/// x; every query solves a fresh local weighted least squares, so fitted
/// models are immutable and queries are safe to run concurrently.
class LoessModel {
public:
    /// span is the neighborhood fraction in (0, 1]; degree is 1 or 2.
    /// Requires at least degree + 2 distinct x values and a neighborhood of
    /// at least degree + 1 points.
    LoessModel(std::vector<double> x, std::vector<double> y, double span, int degree);

    /// Local tricube-weighted polynomial fit evaluated at x0. The
    /// neighborhood is the ceil(span * n) nearest training points, with
    /// distance ties all included. Queries outside [min(x), max(x)] extend
    /// the boundary fit linearly from its value and slope at the boundary.
    LoessPrediction predict(double x0) const;

    /// Fitted values at every training x, in training (sorted) order.
    std::vector<double> fitted_values() const;

    std::span<const double> x_train() const { return x_; }
    std::span<const double> y_train() const { return y_; }
    double span() const { return span_; }
    int degree() const { return degree_; }

    nlohmann::json to_json() const;
    static LoessModel from_json(const nlohmann::json& j);

private:
    std::vector<double> x_;  // sorted ascending
    std::vector<double> y_;  // paired with x_
    double span_;
    int degree_;
    std::size_t neighborhood_;  // ceil(span * n)

    /// Value and slope of the local fit anchored at x0, using the
    /// neighborhood around `anchor`.
    std::pair<double, double> local_fit(double anchor, double x0) const;
};

LoessModel fit_loess(std::span<const double> x, std::span<const double> y, double span,
                     int degree);

/// Pairs each day's 02:00 response with the previous day's fitted 14:00
/// value: (pm_fitted[t-1], y_am[t]) for every t where both exist.
/// pm_fitted must align with frame.rows; NaN marks days without a fit.
/// Throws when fewer than 10 pairs remain.
std::pair<std::vector<double>, std::vector<double>> pair_am_channel(
    const ingest::SupervisedFrame& frame, std::span<const double> pm_fitted);

}  // namespace heatcast::smoother
