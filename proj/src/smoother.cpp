#include "heatcast/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "heatcast/errors.hpp"

namespace heatcast::smoother {

namespace {

/// Solves the symmetric system A b = rhs (dim <= 3) by Gaussian elimination
/// with partial pivoting. Returns false when a pivot collapses, which signals
/// a rank-deficient local design.
bool solve_dense(double a[3][3], double rhs[3], int dim, double out[3]) {
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r) {
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[pivot]][col])) pivot = r;
        }
        std::swap(perm[col], perm[pivot]);
        const double p = a[perm[col]][col];
        if (std::abs(p) < 1e-12) return false;
        for (int r = col + 1; r < dim; ++r) {
            const double f = a[perm[r]][col] / p;
            for (int c = col; c < dim; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
            rhs[perm[r]] -= f * rhs[perm[col]];
        }
    }
    for (int col = dim - 1; col >= 0; --col) {
        double s = rhs[perm[col]];
        for (int c = col + 1; c < dim; ++c) s -= a[perm[col]][c] * out[c];
        out[col] = s / a[perm[col]][col];
    }
    return true;
}

}  // namespace

LoessModel::LoessModel(std::vector<double> x, std::vector<double> y, double span, int degree)
    : x_(std::move(x)), y_(std::move(y)), span_(span), degree_(degree) {
    if (x_.size() != y_.size()) throw DataError("loess inputs must pair up");
    if (degree_ != 1 && degree_ != 2) throw ConfigError("loess degree must be 1 or 2");
    if (!(span_ > 0.0 && span_ <= 1.0)) throw ConfigError("loess span must lie in (0, 1]");
    const std::size_t n = x_.size();
    if (n < static_cast<std::size_t>(degree_) + 2) {
        throw DataError("loess needs at least degree + 2 observations");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
            throw DataError("loess inputs must be finite");
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x_[a] < x_[b]; });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x_[order[i]];
        ys[i] = y_[order[i]];
    }
    x_ = std::move(xs);
    y_ = std::move(ys);

    const std::size_t distinct =
        static_cast<std::size_t>(std::set<double>(x_.begin(), x_.end()).size());
    if (distinct < static_cast<std::size_t>(degree_) + 2) {
        throw DataError("loess needs at least degree + 2 distinct x values");
    }

    neighborhood_ = static_cast<std::size_t>(
        std::ceil(span_ * static_cast<double>(n) - 1e-9));
    if (neighborhood_ < static_cast<std::size_t>(degree_) + 1) {
        throw ConfigError("loess span too small: neighborhood must hold degree + 1 points");
    }
    neighborhood_ = std::min(neighborhood_, n);
}

std::pair<double, double> LoessModel::local_fit(double anchor, double x0) const {
    const std::size_t n = x_.size();

    // k-th smallest distance to the anchor; ties at that distance all enter
    // the neighborhood.
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(x_[i] - anchor);
    std::vector<double> cut(dist);
    std::nth_element(cut.begin(), cut.begin() + static_cast<std::ptrdiff_t>(neighborhood_ - 1),
                     cut.end());
    const double d_max = cut[neighborhood_ - 1];

    std::vector<std::size_t> members;
    members.reserve(neighborhood_ + 4);
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] <= d_max) members.push_back(i);
    }

    std::vector<double> w(members.size());
    double total = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (d_max == 0.0) {
            w[m] = 1.0;
        } else {
            const double u = dist[members[m]] / d_max;
            const double c = 1.0 - u * u * u;
            w[m] = c * c * c;
        }
        total += w[m];
    }
    // The farthest neighbors carry tricube weight 0; if nothing else remains
    // the limiting fit weights the boundary points equally.
    if (total <= 0.0) {
        std::fill(w.begin(), w.end(), 1.0);
    }

    // Weighted polynomial fit in u = (x - x0) / scale; the intercept is the
    // value at x0 and the linear coefficient / scale is the slope there.
    const double scale = d_max > 0.0 ? d_max : 1.0;
    for (int deg = degree_; deg >= 0; --deg) {
        const int dim = deg + 1;
        double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double rhs[3] = {0, 0, 0};
        for (std::size_t m = 0; m < members.size(); ++m) {
            const double u = (x_[members[m]] - x0) / scale;
            double basis[3] = {1.0, u, u * u};
            for (int r = 0; r < dim; ++r) {
                for (int c = 0; c < dim; ++c) a[r][c] += w[m] * basis[r] * basis[c];
                rhs[r] += w[m] * basis[r] * y_[members[m]];
            }
        }
        double beta[3] = {0, 0, 0};
        if (solve_dense(a, rhs, dim, beta)) {
            const double slope = dim >= 2 ? beta[1] / scale : 0.0;
            return {beta[0], slope};
        }
        // Rank-deficient neighborhood (e.g. duplicated x): retry one degree
        // lower; degree 0 is a weighted mean and cannot fail.
    }
    double mean = 0.0, tw = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
        mean += w[m] * y_[members[m]];
        tw += w[m];
    }
    return {mean / tw, 0.0};
}

LoessPrediction LoessModel::predict(double x0) const {
    if (!std::isfinite(x0)) throw DataError("loess query point must be finite");
    const double lo = x_.front();
    const double hi = x_.back();
    if (x0 >= lo && x0 <= hi) {
        return {local_fit(x0, x0).first, false};
    }
    const double boundary = x0 < lo ? lo : hi;
    const auto [value, slope] = local_fit(boundary, boundary);
    return {value + slope * (x0 - boundary), true};
}

std::vector<double> LoessModel::fitted_values() const {
    std::vector<double> out;
    out.reserve(x_.size());
    for (double xi : x_) out.push_back(predict(xi).value);
    return out;
}

nlohmann::json LoessModel::to_json() const {
    return nlohmann::json{{"x", x_}, {"y", y_}, {"span", span_}, {"degree", degree_}};
}

LoessModel LoessModel::from_json(const nlohmann::json& j) {
    return LoessModel(j.at("x").get<std::vector<double>>(),
                      j.at("y").get<std::vector<double>>(), j.at("span").get<double>(),
                      j.at("degree").get<int>());
}

LoessModel fit_loess(std::span<const double> x, std::span<const double> y, double span,
                     int degree) {
    return LoessModel(std::vector<double>(x.begin(), x.end()),
                      std::vector<double>(y.begin(), y.end()), span, degree);
}

std::pair<std::vector<double>, std::vector<double>> pair_am_channel(
    const ingest::SupervisedFrame& frame, std::span<const double> pm_fitted) {
    if (pm_fitted.size() != frame.rows.size()) {
        throw DataError("fitted 14:00 series must align with the frame rows");
    }
    std::vector<double> x, y;
    for (std::size_t t = 1; t < frame.rows.size(); ++t) {
        if (!frame.rows[t].y_am) continue;
        const double prev_fit = pm_fitted[t - 1];
        if (!std::isfinite(prev_fit)) continue;
        x.push_back(prev_fit);
        y.push_back(*frame.rows[t].y_am);
    }
    if (x.size() < 10) {
        throw DataError("too few usable 02:00 pairs: need at least 10, found " +
                        std::to_string(x.size()));
    }
    return {std::move(x), std::move(y)};
}

}  // namespace heatcast::smoother
