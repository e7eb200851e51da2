#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "heatcast/matrix.hpp"

namespace heatcast::tree {

struct TreeParams {
    int max_depth = -1;         ///< negative = unlimited
    int min_node = 5;           ///< minimum observations per terminal node
    int features_per_split = 0; ///< candidate features sampled per node; 0 = all
    std::uint64_t rng_seed = 0;
};

struct Node {
    bool is_leaf = true;
    // split node
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    // leaf node
    double value = 0.0;
    std::vector<int> members;  ///< training-row indices that landed here
};

/// Binary regression tree from exhaustive variance-reduction split search.
/// Splits maximize the reduction in sum of squared deviations of the target;
/// thresholds are midpoints between consecutive distinct feature values;
/// ties break to the lowest feature index, then the smallest threshold;
/// routing sends x[feature] <= threshold to the left child.
class Tree {
public:
    const Node& route(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return route(x).value; }

    const std::vector<Node>& nodes() const { return nodes_; }
    std::vector<int> leaf_indices() const;
    void set_leaf_value(int node_index, double value);

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);

    friend Tree grow(const Matrix&, std::span<const double>, std::span<const int>,
                     const TreeParams&);

private:
    std::vector<Node> nodes_;  // nodes_[0] is the root
};

/// Grow a tree on the rows listed in `row_subset` (duplicates allowed, as
/// produced by bootstrap resampling). Leaf values are target means.
Tree grow(const Matrix& x, std::span<const double> target, std::span<const int> row_subset,
          const TreeParams& params);

/// Convenience: grow on all rows.
Tree grow(const Matrix& x, std::span<const double> target, const TreeParams& params);

}  // namespace heatcast::tree
