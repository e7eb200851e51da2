#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "heatcast/matrix.hpp"
#include "heatcast/tree.hpp"

namespace heatcast::boosting {

/// Check loss: tau * (y - y_hat) for underestimates, (1 - tau) * (y_hat - y)
/// for overestimates. At tau = 0.9 an underestimate costs 9 times the
/// same-sized overestimate.
double quantile_loss(double y, double y_hat, double tau);

/// Negative-gradient direction of the check loss: tau above the fit, tau - 1
/// below, 0 at the kink.
double loss_subgradient(double y, double y_hat, double tau);

double mean_quantile_loss(std::span<const double> y, std::span<const double> y_hat, double tau);

struct BoostParams {
    double tau = 0.9;
    double shrinkage = 0.0001;
    int depth = 6;
    int min_node = 5;
    std::size_t max_trees = 100000;
    std::uint64_t seed = 0;
    /// Fraction of training rows drawn (without replacement) per iteration;
    /// 1.0 disables subsampling. Values below 1 forfeit the per-step
    /// loss-descent guarantee.
    double bag_fraction = 1.0;
};

/// Stagewise quantile gradient boosting: trees fit to the loss subgradient,
/// each leaf then re-valued to the tau-quantile of its members' residuals,
/// scaled by the shrinkage. The model prefix actually used for prediction is
/// chosen by the held-out loss curve.
struct BoostedEnsemble {
    double init_value = 0.0;  ///< tau-quantile of the training response.
    std::vector<tree::Tree> trees;
    double shrinkage = 0.0;
    double tau = 0.5;
    std::size_t best_iter = 0;  ///< argmin of test_loss_curve; ties take the smallest.
    /// Mean check loss after m trees; index 0 is the init-only model.
    std::vector<double> train_loss_curve;
    std::vector<double> test_loss_curve;
    /// Set when the test frame was empty and best_iter fell back to max_trees.
    bool best_iter_fallback = false;
    std::size_t trees_trained = 0;  ///< trees.size() may be truncated on save.

    /// init + shrinkage * sum of the first n_iter trees; n_iter defaults to
    /// best_iter and may not exceed the stored tree count.
    double predict(std::span<const double> x, std::optional<std::size_t> n_iter = {}) const;

    /// Serializes init, shrinkage, tau, best_iter and the first
    /// max_trees_to_keep trees (all when absent). Keeping best_iter trees
    /// preserves default predictions exactly.
    nlohmann::json to_json(std::optional<std::size_t> max_trees_to_keep = {}) const;
    static BoostedEnsemble from_json(const nlohmann::json& j);
};

BoostedEnsemble train(const Matrix& x_train, std::span<const double> y_train,
                      const Matrix& x_test, std::span<const double> y_test,
                      const BoostParams& params);

/// Two-column CSV (iteration, loss) starting at iteration 0.
void write_loss_curve_csv(std::span<const double> curve, std::ostream& out);

}  // namespace heatcast::boosting
