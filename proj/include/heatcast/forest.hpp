#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "heatcast/matrix.hpp"
#include "heatcast/tree.hpp"

namespace heatcast::forest {

inline constexpr std::size_t kDefaultTreeCount = 500;

/// Forest defaults: unlimited depth, min node 5, p/3 candidate features per
/// split (at least 1).
tree::TreeParams default_forest_params(std::size_t n_features);

/// Quantile regression forest: variance-split trees whose leaves retain the
/// training rows that landed there, so any quantile of the response can be
/// recovered at query time from the weighted empirical distribution.
struct Forest {
    std::vector<tree::Tree> trees;
    std::vector<double> train_response;
    tree::TreeParams params;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    std::size_t n_trees() const { return trees.size(); }

    nlohmann::json to_json() const;
    static Forest from_json(const nlohmann::json& j);
};

/// Grows n_trees trees, each on an independent bootstrap resample of the rows
/// (size T, with replacement) when bootstrap is on, else on all rows. Tree
/// seeds derive deterministically from `seed`.
Forest train_forest(const Matrix& x, std::span<const double> y, std::size_t n_trees,
                    const tree::TreeParams& params, bool bootstrap, std::uint64_t seed);

/// Weighted-empirical-CDF quantile at x: each tree routes x to a leaf and
/// spreads weight 1/(n_trees * leaf_size) over that leaf's members; the
/// result is the smallest training response whose cumulative weight reaches
/// q (left-continuous generalized inverse).
double predict_quantile(const Forest& forest, std::span<const double> x, double q);

/// One weight per training row, summing to 1. Exposed so callers can read
/// several quantiles from a single routing pass.
std::vector<double> response_weights(const Forest& forest, std::span<const double> x);

/// Generalized-inverse quantile of (response, weight) pairs; weights must sum
/// to roughly 1.
double weighted_quantile(std::span<const double> responses, std::span<const double> weights,
                         double q);

}  // namespace heatcast::forest
