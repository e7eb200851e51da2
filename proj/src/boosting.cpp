#include "heatcast/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "heatcast/csv.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/stats.hpp"

namespace heatcast::boosting {

double quantile_loss(double y, double y_hat, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    const double r = y - y_hat;
    return r >= 0.0 ? tau * r : (1.0 - tau) * (-r);
}

double loss_subgradient(double y, double y_hat, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (y > y_hat) return tau;
    if (y < y_hat) return tau - 1.0;
    return 0.0;
}

double mean_quantile_loss(std::span<const double> y, std::span<const double> y_hat, double tau) {
    if (y.size() != y_hat.size() || y.empty()) {
        throw DataError("loss needs matching non-empty vectors");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) total += quantile_loss(y[i], y_hat[i], tau);
    return total / static_cast<double>(y.size());
}

namespace {

void validate_responses(std::span<const double> y, const char* which) {
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw DataError(std::string("non-finite response in the ") + which + " set");
        }
    }
}

}  // namespace

BoostedEnsemble train(const Matrix& x_train, std::span<const double> y_train,
                      const Matrix& x_test, std::span<const double> y_test,
                      const BoostParams& params) {
    const std::size_t n = x_train.rows();
    if (n == 0) throw DataError("cannot boost on zero training rows");
    if (y_train.size() != n) throw DataError("training response length must match the rows");
    if (x_test.rows() != y_test.size()) {
        throw DataError("test response length must match the rows");
    }
    if (!y_test.empty() && x_test.cols() != x_train.cols()) {
        throw DataError("train and test frames must share the predictor dimension");
    }
    if (!(params.tau > 0.0 && params.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (!(params.shrinkage > 0.0)) throw ConfigError("shrinkage must be positive");
    if (params.max_trees < 1) throw ConfigError("max_trees must be at least 1");
    if (!(params.bag_fraction > 0.0 && params.bag_fraction <= 1.0)) {
        throw ConfigError("bag_fraction must lie in (0, 1]");
    }
    validate_responses(y_train, "training");
    validate_responses(y_test, "test");

    BoostedEnsemble model;
    model.tau = params.tau;
    model.shrinkage = params.shrinkage;
    model.init_value = stats::lower_quantile(y_train, params.tau);
    model.trees.reserve(params.max_trees);

    std::vector<double> fit_train(n, model.init_value);
    std::vector<double> fit_test(y_test.size(), model.init_value);
    model.train_loss_curve.reserve(params.max_trees + 1);
    model.test_loss_curve.reserve(params.max_trees + 1);
    model.train_loss_curve.push_back(mean_quantile_loss(y_train, fit_train, params.tau));
    if (!y_test.empty()) {
        model.test_loss_curve.push_back(mean_quantile_loss(y_test, fit_test, params.tau));
    }

    tree::TreeParams tree_params;
    tree_params.max_depth = params.depth;
    tree_params.min_node = params.min_node;
    tree_params.features_per_split = 0;

    const bool subsample = params.bag_fraction < 1.0;
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const std::size_t bag_size = subsample
        ? std::max<std::size_t>(static_cast<std::size_t>(params.min_node),
                                static_cast<std::size_t>(std::floor(
                                    params.bag_fraction * static_cast<double>(n))))
        : n;

    std::vector<double> gradient(n);
    std::vector<double> residual(n);
    std::vector<double> leaf_values;

    for (std::size_t m = 0; m < params.max_trees; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            gradient[i] = loss_subgradient(y_train[i], fit_train[i], params.tau);
            residual[i] = y_train[i] - fit_train[i];
        }

        tree_params.rng_seed = derive_seed(params.seed, "boost_tree", m);
        tree::Tree fitted;
        if (subsample) {
            auto engine = make_engine(derive_seed(params.seed, "boost_bag", m));
            std::vector<int> bag(all_rows);
            std::shuffle(bag.begin(), bag.end(), engine);
            bag.resize(bag_size);
            std::sort(bag.begin(), bag.end());
            fitted = tree::grow(x_train, gradient, bag, tree_params);
        } else {
            fitted = tree::grow(x_train, gradient, all_rows, tree_params);
        }

        // Terminal-node line search: each leaf takes the tau-quantile of the
        // raw residuals of its members, the exact check-loss minimizer there.
        for (int leaf_idx : fitted.leaf_indices()) {
            const tree::Node& leaf = fitted.nodes()[static_cast<std::size_t>(leaf_idx)];
            leaf_values.clear();
            leaf_values.reserve(leaf.members.size());
            for (int row : leaf.members) {
                leaf_values.push_back(residual[static_cast<std::size_t>(row)]);
            }
            fitted.set_leaf_value(leaf_idx, stats::lower_quantile(leaf_values, params.tau));
        }

        if (subsample) {
            for (std::size_t i = 0; i < n; ++i) {
                fit_train[i] += params.shrinkage * fitted.predict(x_train.row(i));
            }
        } else {
            // Every row sits in exactly one leaf, so the member lists update
            // the fit without re-routing.
            for (int leaf_idx : fitted.leaf_indices()) {
                const tree::Node& leaf = fitted.nodes()[static_cast<std::size_t>(leaf_idx)];
                for (int row : leaf.members) {
                    fit_train[static_cast<std::size_t>(row)] += params.shrinkage * leaf.value;
                }
            }
        }
        for (std::size_t i = 0; i < fit_test.size(); ++i) {
            fit_test[i] += params.shrinkage * fitted.predict(x_test.row(i));
        }

        model.trees.push_back(std::move(fitted));
        model.train_loss_curve.push_back(mean_quantile_loss(y_train, fit_train, params.tau));
        if (!y_test.empty()) {
            model.test_loss_curve.push_back(mean_quantile_loss(y_test, fit_test, params.tau));
        }
    }

    model.trees_trained = model.trees.size();
    if (y_test.empty()) {
        model.best_iter = params.max_trees;
        model.best_iter_fallback = true;
    } else {
        const auto best = std::min_element(model.test_loss_curve.begin(),
                                           model.test_loss_curve.end());
        model.best_iter = static_cast<std::size_t>(best - model.test_loss_curve.begin());
    }
    return model;
}

double BoostedEnsemble::predict(std::span<const double> x,
                                std::optional<std::size_t> n_iter) const {
    const std::size_t limit = n_iter.value_or(best_iter);
    if (limit > trees.size()) {
        throw ConfigError("prediction requested more trees than the ensemble stores");
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < limit; ++m) sum += trees[m].predict(x);
    return init_value + shrinkage * sum;
}

nlohmann::json BoostedEnsemble::to_json(std::optional<std::size_t> max_trees_to_keep) const {
    const std::size_t keep = std::min(trees.size(), max_trees_to_keep.value_or(trees.size()));
    nlohmann::json trees_json = nlohmann::json::array();
    for (std::size_t m = 0; m < keep; ++m) trees_json.push_back(trees[m].to_json());
    return nlohmann::json{
        {"version", 1},
        {"init_value", init_value},
        {"shrinkage", shrinkage},
        {"tau", tau},
        {"best_iter", best_iter},
        {"best_iter_fallback", best_iter_fallback},
        {"trees_trained", trees_trained},
        {"trees", std::move(trees_json)},
    };
}

BoostedEnsemble BoostedEnsemble::from_json(const nlohmann::json& j) {
    BoostedEnsemble model;
    model.init_value = j.at("init_value").get<double>();
    model.shrinkage = j.at("shrinkage").get<double>();
    model.tau = j.at("tau").get<double>();
    model.best_iter = j.at("best_iter").get<std::size_t>();
    model.best_iter_fallback = j.value("best_iter_fallback", false);
    model.trees_trained = j.value("trees_trained", std::size_t{0});
    for (const auto& tj : j.at("trees")) model.trees.push_back(tree::Tree::from_json(tj));
    if (model.best_iter > model.trees.size()) {
        throw DataError("ensemble document stores fewer trees than best_iter");
    }
    return model;
}

void write_loss_curve_csv(std::span<const double> curve, std::ostream& out) {
    csv::write_row(out, {"iteration", "loss"}, ',');
    for (std::size_t i = 0; i < curve.size(); ++i) {
        csv::write_row(out, {std::to_string(i), csv::format_double(curve[i])}, ',');
    }
}

}  // namespace heatcast::boosting
