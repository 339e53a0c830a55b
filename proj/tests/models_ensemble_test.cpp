#include <cmath>
#include <random>

#include "doctest.h"

#include "spamdet/errors.hpp"
#include "spamdet/models.hpp"
#include "support/oracles.hpp"

using namespace spamdet;

namespace {

FeatureMatrix noisy_matrix(std::mt19937_64& rng, std::size_t n, std::uint32_t dim) {
    FeatureMatrix m = testsupport::random_matrix(rng, n, dim, 0.5, false);
    // plant signal in column 0 so trees have something to find
    for (std::size_t i = 0; i < n; ++i) {
        SparseVector& row = m.rows[i];
        const double v = m.labels[i] == 1 ? 0.9 : 0.1;
        if (!row.entries.empty() && row.entries[0].index == 0)
            row.entries[0].value = v;
        else
            row.entries.insert(row.entries.begin(), {0, v});
    }
    return m;
}

} // namespace

TEST_SUITE("ensembles") {

TEST_CASE("single-tree forest without bootstrap reproduces the decision tree") {
    std::mt19937_64 rng(61);
    const FeatureMatrix m = noisy_matrix(rng, 80, 6);

    TrainConfig dt = decision_tree_defaults();
    dt.max_depth = 6;
    dt.min_samples_leaf = 2;

    TrainConfig rf = random_forest_defaults();
    rf.n_trees = 1;
    rf.bootstrap = false;
    rf.feature_subsample_ratio = 1.0;
    rf.max_depth = 6;
    rf.min_samples_leaf = 2;

    const TrainedModel tree = train_decision_tree(m, dt, 2);
    const TrainedModel forest = train_random_forest(m, rf, 2);
    for (const auto& row : m.rows) CHECK(forest.predict(row) == tree.predict(row));
}

TEST_CASE("forest predictions average the trees and land in [0,1]") {
    std::mt19937_64 rng(67);
    const FeatureMatrix m = noisy_matrix(rng, 120, 6);
    TrainConfig config = random_forest_defaults();
    config.n_trees = 12;
    config.max_depth = 6;
    const TrainedModel forest = train_random_forest(m, config, 4);
    const Ensemble& e = std::get<Ensemble>(forest.model);
    REQUIRE(e.trees.size() == 12);
    CHECK(e.kind == Ensemble::Kind::bagged);
    for (const auto& row : m.rows) {
        double sum = 0.0;
        for (const auto& t : e.trees) sum += t.predict(row);
        CHECK(forest.predict(row) == doctest::Approx(sum / 12.0).epsilon(1e-15));
        CHECK(forest.predict(row) >= 0.0);
        CHECK(forest.predict(row) <= 1.0);
    }
}

TEST_CASE("forest training is seed-deterministic and worker-independent") {
    std::mt19937_64 rng(71);
    const FeatureMatrix m = noisy_matrix(rng, 100, 8);
    TrainConfig config = random_forest_defaults();
    config.n_trees = 8;
    config.max_depth = 5;
    const std::string a = train_random_forest(m, config, 1).to_json();
    const std::string b = train_random_forest(m, config, 4).to_json();
    CHECK(a == b);

    config.seed += 1;
    CHECK(train_random_forest(m, config, 4).to_json() != a);
}

TEST_CASE("forest learns the planted signal") {
    std::mt19937_64 rng(73);
    const FeatureMatrix m = noisy_matrix(rng, 200, 6);
    TrainConfig config = random_forest_defaults();
    config.n_trees = 30;
    config.max_depth = 8;
    config.min_samples_leaf = 1;
    const TrainedModel forest = train_random_forest(m, config, 4);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        hits += static_cast<int>(forest.classify(m.rows[i])) == m.labels[i];
    CHECK(static_cast<double>(hits) / static_cast<double>(m.n_rows()) >= 0.95);
}

TEST_CASE("forest rejects bad subsample ratios") {
    std::mt19937_64 rng(79);
    const FeatureMatrix m = noisy_matrix(rng, 20, 3);
    TrainConfig config = random_forest_defaults();
    config.feature_subsample_ratio = 0.0;
    CHECK_THROWS_AS(train_random_forest(m, config), TrainError);
    config.feature_subsample_ratio = 1.5;
    CHECK_THROWS_AS(train_random_forest(m, config), TrainError);
}

TEST_CASE("zero boosting rounds predict the squashed base log-odds") {
    std::mt19937_64 rng(83);
    FeatureMatrix m = testsupport::random_matrix(rng, 40, 3, 0.5, false);
    int pos = 0;
    for (int l : m.labels) pos += l;
    const double rate = static_cast<double>(pos) / 40.0;

    TrainConfig config = gradient_boosting_defaults();
    config.n_trees = 0;
    const TrainedModel model = train_gradient_boosting(m, config);
    const double expected = 1.0 / (1.0 + std::exp(-std::log(rate / (1.0 - rate))));
    for (const auto& row : m.rows)
        CHECK(model.predict(row) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("boosting drives the training loss down") {
    std::mt19937_64 rng(89);
    const FeatureMatrix m = noisy_matrix(rng, 150, 5);
    TrainConfig config = gradient_boosting_defaults();
    config.n_trees = 25;
    config.max_depth = 3;
    TrainDiagnostics diag;
    const TrainedModel model = train_gradient_boosting(m, config, &diag, 4);
    REQUIRE(diag.loss.size() == 25);
    CHECK(diag.loss.back() < diag.loss.front());

    std::size_t hits = 0;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        hits += static_cast<int>(model.classify(m.rows[i])) == m.labels[i];
    CHECK(static_cast<double>(hits) / static_cast<double>(m.n_rows()) >= 0.95);
}

TEST_CASE("boosting is deterministic and worker-independent") {
    std::mt19937_64 rng(97);
    const FeatureMatrix m = noisy_matrix(rng, 90, 5);
    TrainConfig config = gradient_boosting_defaults();
    config.n_trees = 10;
    CHECK(train_gradient_boosting(m, config, nullptr, 1).to_json() ==
          train_gradient_boosting(m, config, nullptr, 4).to_json());
}

TEST_CASE("boosting validates inputs") {
    std::mt19937_64 rng(101);
    FeatureMatrix m = testsupport::random_matrix(rng, 20, 3, 0.5, false);

    TrainConfig config = gradient_boosting_defaults();
    config.learning_rate = 0.0;
    CHECK_THROWS_AS(train_gradient_boosting(m, config), TrainError);
    config.learning_rate = 1.5;
    CHECK_THROWS_AS(train_gradient_boosting(m, config), TrainError);

    for (auto& l : m.labels) l = 0;
    CHECK_THROWS_AS(train_gradient_boosting(m, gradient_boosting_defaults()), TrainError);
}

TEST_CASE("ensemble json round trip preserves predictions") {
    std::mt19937_64 rng(103);
    const FeatureMatrix m = noisy_matrix(rng, 60, 4);

    TrainConfig rf = random_forest_defaults();
    rf.n_trees = 5;
    rf.max_depth = 4;
    const TrainedModel forest = train_random_forest(m, rf, 2);
    const TrainedModel forest_back = TrainedModel::from_json(forest.to_json());
    for (const auto& row : m.rows) CHECK(forest.predict(row) == forest_back.predict(row));

    TrainConfig gb = gradient_boosting_defaults();
    gb.n_trees = 5;
    const TrainedModel boosted = train_gradient_boosting(m, gb);
    const TrainedModel boosted_back = TrainedModel::from_json(boosted.to_json());
    for (const auto& row : m.rows) CHECK(boosted.predict(row) == boosted_back.predict(row));
}

} // TEST_SUITE
