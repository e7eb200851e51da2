#include "heatcast/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"

namespace heatcast::forest {

tree::TreeParams default_forest_params(std::size_t n_features) {
    tree::TreeParams params;
    params.max_depth = -1;
    params.min_node = 5;
    params.features_per_split = std::max(1, static_cast<int>(n_features / 3));
    return params;
}

Forest train_forest(const Matrix& x, std::span<const double> y, std::size_t n_trees,
                    const tree::TreeParams& params, bool bootstrap, std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (n == 0) throw DataError("cannot train a forest on zero rows");
    if (y.size() != n) throw DataError("response length must match the row count");
    if (n_trees == 0) throw ConfigError("forest needs at least one tree");
    if (n < static_cast<std::size_t>(params.min_node)) {
        throw DataError("fewer rows than the minimum node size");
    }

    Forest forest;
    forest.train_response.assign(y.begin(), y.end());
    forest.params = params;
    forest.bootstrap = bootstrap;
    forest.seed = seed;
    forest.trees.reserve(n_trees);

    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    for (std::size_t t = 0; t < n_trees; ++t) {
        tree::TreeParams tree_params = params;
        tree_params.rng_seed = derive_seed(seed, "forest_tree", t);
        if (bootstrap) {
            auto engine = make_engine(derive_seed(seed, "forest_bootstrap", t));
            std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
            std::vector<int> rows(n);
            for (int& r : rows) r = pick(engine);
            forest.trees.push_back(tree::grow(x, y, rows, tree_params));
        } else {
            forest.trees.push_back(tree::grow(x, y, all_rows, tree_params));
        }
    }
    return forest;
}

std::vector<double> response_weights(const Forest& forest, std::span<const double> x) {
    if (forest.trees.empty()) throw ModelError("forest has no trees");
    std::vector<double> weight(forest.train_response.size(), 0.0);
    const double per_tree = 1.0 / static_cast<double>(forest.n_trees());
    for (const tree::Tree& t : forest.trees) {
        const tree::Node& leaf = t.route(x);
        const double w = per_tree / static_cast<double>(leaf.members.size());
        for (int idx : leaf.members) weight[static_cast<std::size_t>(idx)] += w;
    }
    return weight;
}

double weighted_quantile(std::span<const double> responses, std::span<const double> weights,
                         double q) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
    if (responses.size() != weights.size() || responses.empty()) {
        throw DataError("weighted quantile needs matching non-empty inputs");
    }
    std::vector<std::size_t> order(responses.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return responses[a] < responses[b]; });
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += weights[i];
        if (cum >= q - 1e-9) return responses[i];
    }
    return responses[order.back()];
}

double predict_quantile(const Forest& forest, std::span<const double> x, double q) {
    const std::vector<double> weight = response_weights(forest, x);
    return weighted_quantile(forest.train_response, weight, q);
}

nlohmann::json Forest::to_json() const {
    nlohmann::json trees_json = nlohmann::json::array();
    for (const tree::Tree& t : trees) trees_json.push_back(t.to_json());
    return nlohmann::json{
        {"version", 1},
        {"bootstrap", bootstrap},
        {"seed", seed},
        {"params",
         {{"max_depth", params.max_depth},
          {"min_node", params.min_node},
          {"features_per_split", params.features_per_split}}},
        {"response", train_response},
        {"trees", std::move(trees_json)},
    };
}

Forest Forest::from_json(const nlohmann::json& j) {
    Forest forest;
    forest.bootstrap = j.at("bootstrap").get<bool>();
    forest.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    forest.params.max_depth = p.at("max_depth").get<int>();
    forest.params.min_node = p.at("min_node").get<int>();
    forest.params.features_per_split = p.at("features_per_split").get<int>();
    forest.train_response = j.at("response").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) forest.trees.push_back(tree::Tree::from_json(tj));
    if (forest.trees.empty()) throw DataError("forest document holds no trees");
    return forest;
}

}  // namespace heatcast::forest
