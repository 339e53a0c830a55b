#include <algorithm>
#include <cmath>
#include <random>

#include "internal/math_util.hpp"
#include "spamdet/errors.hpp"
#include "spamdet/parallel.hpp"
#include "tree_builder.hpp"

namespace spamdet {

namespace {

constexpr std::uint64_t kTreeSeedStride = 0x9E3779B97F4A7C15ULL;

std::uint32_t resolve_subset_size(const TrainConfig& config, std::uint32_t n_columns) {
    if (n_columns == 0) return 0;
    double ratio_columns;
    if (config.feature_subsample_ratio.has_value()) {
        const double r = *config.feature_subsample_ratio;
        if (!(r > 0.0) || r > 1.0)
            throw TrainError("feature_subsample_ratio must lie in (0, 1]");
        ratio_columns = r * static_cast<double>(n_columns);
    } else {
        ratio_columns = std::sqrt(static_cast<double>(n_columns));
    }
    const auto m = static_cast<std::uint32_t>(std::ceil(ratio_columns));
    return std::clamp<std::uint32_t>(m, 1, n_columns);
}

} // namespace

TrainedModel train_random_forest(const FeatureMatrix& matrix, const TrainConfig& config,
                                 unsigned workers) {
    const auto n = static_cast<std::uint32_t>(matrix.n_rows());
    if (n == 0) throw TrainError("training requires a non-empty matrix");
    if (config.n_trees < 1) throw TrainError("a forest needs at least one tree");
    if (config.min_samples_leaf < 1) throw TrainError("min_samples_leaf must be at least 1");

    const auto index = detail::ColumnIndex::build(matrix);
    const auto base_targets = detail::classification_targets(matrix);
    const std::uint32_t subset = resolve_subset_size(config, index.n_columns);

    Ensemble ensemble;
    ensemble.kind = Ensemble::Kind::bagged;
    ensemble.trees.resize(config.n_trees);
    parallel_for_each(config.n_trees, workers, [&](std::size_t t) {
        std::mt19937_64 rng(config.seed ^ (kTreeSeedStride * (t + 1)));
        detail::ColumnLists lists;
        std::vector<std::uint8_t> targets;
        if (config.bootstrap) {
            std::vector<std::uint32_t> counts(n, 0);
            for (std::uint32_t d = 0; d < n; ++d) ++counts[rng() % n];
            std::vector<std::uint32_t> slot_row;
            lists = detail::bootstrap_working_set(index, counts, slot_row);
            targets.resize(n);
            for (std::uint32_t s = 0; s < n; ++s) targets[s] = base_targets[slot_row[s]];
        } else {
            lists = detail::identity_working_set(index);
            targets = base_targets;
        }
        detail::GrowSpec spec{config.max_depth, config.min_samples_leaf, subset, &rng};
        const unsigned inner = config.n_trees == 1 ? workers : 1;
        ensemble.trees[t] = detail::grow_tree<detail::GiniCriterion>(
            index.n_columns, n, std::move(lists), targets, spec, inner);
    });

    TrainedModel out;
    out.model = std::move(ensemble);
    out.dimension = matrix.dimension();
    return out;
}

TrainedModel train_gradient_boosting(const FeatureMatrix& matrix, const TrainConfig& config,
                                     TrainDiagnostics* diag, unsigned workers) {
    const auto n = static_cast<std::uint32_t>(matrix.n_rows());
    if (n == 0) throw TrainError("training requires a non-empty matrix");
    if (config.min_samples_leaf < 1) throw TrainError("min_samples_leaf must be at least 1");
    if (!(config.learning_rate > 0.0) || config.learning_rate > 1.0)
        throw TrainError("boosting learning_rate must lie in (0, 1]");

    std::int64_t n_pos = 0;
    for (int y : matrix.labels) n_pos += y;
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(n))
        throw TrainError("single-class training set: base log-odds is not finite");
    const double rate = static_cast<double>(n_pos) / static_cast<double>(n);

    const auto index = detail::ColumnIndex::build(matrix);
    const auto labels = detail::classification_targets(matrix);

    Ensemble ensemble;
    ensemble.kind = Ensemble::Kind::boosted;
    ensemble.learning_rate = config.learning_rate;
    ensemble.base_score = std::log(rate / (1.0 - rate));
    ensemble.trees.reserve(config.n_trees);
    if (diag) diag->loss.clear();

    std::vector<double> score(n, ensemble.base_score);
    std::vector<double> residual(n);
    detail::GrowSpec spec{config.max_depth, config.min_samples_leaf, index.n_columns, nullptr};
    for (std::uint32_t round = 0; round < config.n_trees; ++round) {
        for (std::uint32_t i = 0; i < n; ++i)
            residual[i] = static_cast<double>(labels[i]) - detail::stable_sigmoid(score[i]);
        Tree tree = detail::grow_tree<detail::VarianceCriterion>(
            index.n_columns, n, detail::identity_working_set(index), residual, spec, workers);
        double loss = 0.0;
        for (std::uint32_t i = 0; i < n; ++i) {
            score[i] += config.learning_rate * tree.predict(matrix.rows[i]);
            loss += detail::softplus(score[i]) - static_cast<double>(labels[i]) * score[i];
        }
        if (!std::isfinite(loss)) throw TrainError("boosting diverged: non-finite loss");
        if (diag) diag->loss.push_back(loss / static_cast<double>(n));
        ensemble.trees.push_back(std::move(tree));
    }

    TrainedModel out;
    out.model = std::move(ensemble);
    out.dimension = matrix.dimension();
    return out;
}

} // namespace spamdet
