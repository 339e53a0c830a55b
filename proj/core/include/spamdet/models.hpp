#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spamdet/features.hpp"
#include "spamdet/sparse.hpp"

namespace spamdet {

struct LinearModel {
    enum class Kind { logistic, hinge };
    Kind kind = Kind::logistic;
    std::vector<double> weights;
    double bias = 0.0;
};

/// Flat binary tree. column < 0 marks a leaf carrying `score`; internal nodes
/// route value <= threshold to `left`, else `right`.
struct TreeNode {
    std::int32_t column = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double score = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0

    double predict(const SparseVector& row) const;
};

struct Ensemble {
    enum class Kind { bagged, boosted };
    Kind kind = Kind::bagged;
    std::vector<Tree> trees;
    double learning_rate = 0.0;  // boosted only
    double base_score = 0.0;     // boosted only, log-odds
};

struct TrainConfig {
    std::uint64_t seed = 42;
    std::uint32_t epochs = 30;
    double learning_rate = 0.1;
    double l2_penalty = 1e-4;
    std::uint32_t batch_size = 256;
    std::uint32_t max_depth = 12;
    std::uint32_t min_samples_leaf = 5;
    std::uint32_t n_trees = 100;
    /// Per-node candidate-column fraction; nullopt = ceil(sqrt(V)) columns.
    std::optional<double> feature_subsample_ratio;
    bool bootstrap = true;  // forests only
};

/// Paper-silent hyperparameter defaults, fixed as part of this artifact's contract.
TrainConfig logistic_defaults();
TrainConfig svm_defaults();
TrainConfig decision_tree_defaults();
TrainConfig random_forest_defaults();
TrainConfig gradient_boosting_defaults();

/// Optional per-epoch / per-round training-loss trace for diagnostics and tests.
struct TrainDiagnostics {
    std::vector<double> loss;
};

struct TrainedModel {
    std::variant<LinearModel, Tree, Ensemble> model;
    double threshold = 0.5;
    std::uint32_t dimension = 0;

    /// Spam-probability-like score in [0,1]; pure and deterministic. Throws
    /// DataError on a row/model dimension mismatch.
    double predict(const SparseVector& row) const;
    bool classify(const SparseVector& row) const { return predict(row) >= threshold; }

    /// Versioned JSON round-trip; `meta` keys (model name, config digest) ride along.
    std::string to_json(const std::vector<std::pair<std::string, std::string>>& meta = {}) const;
    static TrainedModel from_json(std::string_view text,
                                  std::vector<std::pair<std::string, std::string>>* meta = nullptr);
};

/// Full-batch L2-regularized losses and analytic gradients, exposed for
/// finite-difference verification. Loss is the mean sample loss plus
/// (l2/2)*||w||^2; gradients are with respect to (weights, bias).
double logistic_loss(const FeatureMatrix& m, const std::vector<double>& w, double bias, double l2,
                     std::vector<double>* grad_w = nullptr, double* grad_b = nullptr);
double hinge_loss(const FeatureMatrix& m, const std::vector<double>& w, double bias, double l2,
                  std::vector<double>* grad_w = nullptr, double* grad_b = nullptr);

/// Mini-batch gradient descent on L2-regularized negative log-likelihood.
/// Deterministic for a given seed. Throws TrainError on a single-class training
/// set or a non-finite epoch loss.
TrainedModel train_logistic(const FeatureMatrix& matrix, const TrainConfig& config,
                            TrainDiagnostics* diag = nullptr);

/// Sub-gradient descent on L2-regularized hinge loss; labels go through the
/// internal +-1 mapping and scores come back through a logistic squash.
TrainedModel train_linear_svm(const FeatureMatrix& matrix, const TrainConfig& config,
                              TrainDiagnostics* diag = nullptr);

/// CART with Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct sorted column values; ties break toward the lowest
/// column index, then the smallest threshold. Leaf score is the positive-class
/// fraction.
TrainedModel train_decision_tree(const FeatureMatrix& matrix, const TrainConfig& config,
                                 unsigned workers = 1);

/// Bagged CART trees on bootstrap resamples with per-node column subsets of
/// ceil(ratio*V) columns. Per-tree randomness is keyed by (seed, tree_index), so
/// results do not depend on training order or worker count. Prediction is the
/// mean of per-tree leaf scores.
TrainedModel train_random_forest(const FeatureMatrix& matrix, const TrainConfig& config,
                                 unsigned workers = 1);

/// Boosted regression trees on logistic loss: base score is the training
/// log-odds, each round fits a variance-reduction CART tree to residuals y - p
/// and the additive score moves by learning_rate * tree. Throws TrainError on a
/// single-class training set.
TrainedModel train_gradient_boosting(const FeatureMatrix& matrix, const TrainConfig& config,
                                     TrainDiagnostics* diag = nullptr, unsigned workers = 1);

} // namespace spamdet
