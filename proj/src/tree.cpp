#include "heatcast/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "heatcast/errors.hpp"

namespace heatcast::tree {

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

struct Grower {
    const Matrix& x;
    std::span<const double> target;
    const TreeParams& params;
    std::mt19937_64 engine;
    int n_candidate_features;

    std::vector<Node> nodes;
    std::vector<int> feature_pool;                   // for per-node sampling
    std::vector<std::pair<double, double>> sorted;   // (feature value, target)

    Grower(const Matrix& x_, std::span<const double> target_, const TreeParams& params_)
        : x(x_), target(target_), params(params_), engine(params_.rng_seed) {
        const int p = static_cast<int>(x.cols());
        n_candidate_features =
            (params.features_per_split <= 0 || params.features_per_split >= p)
                ? p
                : params.features_per_split;
        feature_pool.resize(static_cast<std::size_t>(p));
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }

    // Candidate features for one node, ascending. Sampling without
    // replacement only when fewer than p are requested, so the engine state
    // is untouched in the all-features case.
    std::vector<int> candidate_features() {
        const int p = static_cast<int>(x.cols());
        if (n_candidate_features >= p) return feature_pool;
        std::vector<int> picked;
        picked.reserve(static_cast<std::size_t>(n_candidate_features));
        // partial Fisher-Yates over a fresh pool
        std::vector<int> pool = feature_pool;
        for (int i = 0; i < n_candidate_features; ++i) {
            std::uniform_int_distribution<int> pick(i, p - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(engine))]);
            picked.push_back(pool[static_cast<std::size_t>(i)]);
        }
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    SplitChoice best_split(std::span<const int> members) {
        const auto n = members.size();
        double total = 0.0;
        for (int idx : members) total += target[static_cast<std::size_t>(idx)];
        const double parent_score = total * total / static_cast<double>(n);

        SplitChoice best;
        for (int f : candidate_features()) {
            sorted.clear();
            for (int idx : members) {
                sorted.emplace_back(x(static_cast<std::size_t>(idx), static_cast<std::size_t>(f)),
                                    target[static_cast<std::size_t>(idx)]);
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += sorted[i].second;
                if (sorted[i].first == sorted[i + 1].first) continue;  // not a distinct boundary
                const auto lc = i + 1;
                const auto rc = n - lc;
                if (lc < static_cast<std::size_t>(params.min_node) ||
                    rc < static_cast<std::size_t>(params.min_node)) {
                    continue;
                }
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(lc) +
                                    right_sum * right_sum / static_cast<double>(rc) - parent_score;
                // strict improvement keeps the first (lowest feature, smallest
                // threshold) candidate on ties; best.gain starts at 0 so
                // non-positive gains never win
                if (gain > best.gain) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = sorted[i].first + 0.5 * (sorted[i + 1].first - sorted[i].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    int build(std::vector<int>& members, int depth) {
        const auto n = members.size();
        double total = 0.0;
        double lo = members.empty() ? 0.0 : target[static_cast<std::size_t>(members[0])];
        double hi = lo;
        for (int idx : members) {
            const double t = target[static_cast<std::size_t>(idx)];
            total += t;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }

        const bool depth_capped = params.max_depth >= 0 && depth >= params.max_depth;
        const bool too_small = n < 2 * static_cast<std::size_t>(params.min_node);
        SplitChoice split;
        if (!depth_capped && !too_small && lo < hi) split = best_split(members);

        if (!split.found) {
            Node leaf;
            leaf.is_leaf = true;
            leaf.value = total / static_cast<double>(n);
            leaf.members = members;
            nodes.push_back(std::move(leaf));
            return static_cast<int>(nodes.size() - 1);
        }

        std::vector<int> left_members;
        std::vector<int> right_members;
        for (int idx : members) {
            const double v =
                x(static_cast<std::size_t>(idx), static_cast<std::size_t>(split.feature));
            (v <= split.threshold ? left_members : right_members).push_back(idx);
        }

        const int node_index = static_cast<int>(nodes.size());
        Node internal;
        internal.is_leaf = false;
        internal.feature = split.feature;
        internal.threshold = split.threshold;
        nodes.push_back(std::move(internal));

        const int left = build(left_members, depth + 1);
        const int right = build(right_members, depth + 1);
        nodes[static_cast<std::size_t>(node_index)].left = left;
        nodes[static_cast<std::size_t>(node_index)].right = right;
        return node_index;
    }
};

}  // namespace

const Node& Tree::route(std::span<const double> x) const {
    const Node* node = &nodes_[0];
    while (!node->is_leaf) {
        node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
                   ? &nodes_[static_cast<std::size_t>(node->left)]
                   : &nodes_[static_cast<std::size_t>(node->right)];
    }
    return *node;
}

std::vector<int> Tree::leaf_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf) out.push_back(static_cast<int>(i));
    }
    return out;
}

void Tree::set_leaf_value(int node_index, double value) {
    Node& node = nodes_.at(static_cast<std::size_t>(node_index));
    if (!node.is_leaf) throw ModelError("set_leaf_value on an internal node");
    node.value = value;
}

nlohmann::json Tree::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : nodes_) {
        if (n.is_leaf) {
            nodes.push_back({{"kind", "leaf"}, {"value", n.value}, {"members", n.members}});
        } else {
            nodes.push_back({{"kind", "split"},
                             {"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
        }
    }
    return nlohmann::json{{"nodes", nodes}};
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree tree;
    for (const auto& jn : j.at("nodes")) {
        Node n;
        if (jn.at("kind") == "leaf") {
            n.is_leaf = true;
            n.value = jn.at("value").get<double>();
            n.members = jn.at("members").get<std::vector<int>>();
        } else {
            n.is_leaf = false;
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
        }
        tree.nodes_.push_back(std::move(n));
    }
    if (tree.nodes_.empty()) throw ModelError("tree document has no nodes");
    return tree;
}

Tree grow(const Matrix& x, std::span<const double> target, std::span<const int> row_subset,
          const TreeParams& params) {
    if (row_subset.empty()) throw DataError("cannot grow a tree on an empty row subset");
    if (params.min_node < 1) throw ConfigError("min_node must be >= 1");
    for (int idx : row_subset) {
        if (!std::isfinite(target[static_cast<std::size_t>(idx)])) {
            throw DataError("non-finite target value in tree growth");
        }
    }
    Grower grower(x, target, params);
    std::vector<int> members(row_subset.begin(), row_subset.end());
    grower.build(members, 0);
    Tree tree;
    tree.nodes_ = std::move(grower.nodes);
    return tree;
}

Tree grow(const Matrix& x, std::span<const double> target, const TreeParams& params) {
    std::vector<int> all(x.rows());
    std::iota(all.begin(), all.end(), 0);
    return grow(x, target, all, params);
}

}  // namespace heatcast::tree
