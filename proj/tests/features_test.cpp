#include <random>

#include "doctest.h"

#include "spamdet/errors.hpp"
#include "spamdet/features.hpp"
#include "support/oracles.hpp"

using namespace spamdet;

namespace {

ReviewRecord review(const std::string& who, const std::string& text, const std::string& summary,
                    std::int64_t helpful, std::int64_t total) {
    ReviewRecord r;
    r.reviewer_id = who;
    r.product_id = "P";
    r.review_text = text;
    r.summary = summary;
    r.rating = 4;
    r.helpful_votes = helpful;
    r.total_votes = total;
    r.label = 1;
    return r;
}

/// Binary single-column matrix realizing the 2x2 table
/// a = spam with feature, b = spam without, c = ham with, d = ham without.
FeatureMatrix table_matrix(int a, int b, int c, int d) {
    FeatureMatrix m;
    m.column_names = {"f"};
    const auto push = [&m](double value, int label) {
        SparseVector row;
        row.dimension = 1;
        if (value != 0.0) row.entries.push_back({0, value});
        m.rows.push_back(std::move(row));
        m.labels.push_back(label);
    };
    for (int i = 0; i < a; ++i) push(1.0, 1);
    for (int i = 0; i < b; ++i) push(0.0, 1);
    for (int i = 0; i < c; ++i) push(1.0, 0);
    for (int i = 0; i < d; ++i) push(0.0, 0);
    return m;
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("behavioral features count tokens before stop-word removal") {
    const std::vector<ReviewRecord> train = {review("A", "x", "s", 0, 0),
                                             review("A", "y", "s", 0, 0),
                                             review("B", "z", "s", 0, 0)};
    const ReviewerCounts counts = count_reviewers(train);
    const BehavioralFeatures f =
        behavioral_features(review("A", "This phone case is great.", "Great case!", 2, 4), counts);
    CHECK(f.review_length == 5);
    CHECK(f.summary_length == 2);
    CHECK(f.helpfulness_ratio == doctest::Approx(0.5));
    CHECK(f.reviewer_frequency == 2);
}

TEST_CASE("zero votes give ratio 0 and unseen reviewers frequency 0") {
    const BehavioralFeatures f = behavioral_features(review("ghost", "words here", "s", 0, 0), {});
    CHECK(f.helpfulness_ratio == 0.0);
    CHECK(f.reviewer_frequency == 0);
}

TEST_CASE("min-max scaler maps training extremes to 0 and 1 without clipping") {
    std::vector<BehavioralFeatures> block(3);
    block[0].review_length = 10;
    block[1].review_length = 20;
    block[2].review_length = 30;
    for (auto& b : block) b.helpfulness_ratio = 0.5;  // constant column
    const BehavioralScaler scaler = BehavioralScaler::fit(block);

    CHECK(scaler.apply(block[0])[0] == 0.0);
    CHECK(scaler.apply(block[2])[0] == 1.0);
    CHECK(scaler.apply(block[1])[0] == doctest::Approx(0.5));
    CHECK(scaler.apply(block[0])[2] == 0.0);  // constant -> 0

    BehavioralFeatures outside;
    outside.review_length = 40;
    CHECK(scaler.apply(outside)[0] == doctest::Approx(1.5));  // beyond max, not clipped
    outside.review_length = 0;
    CHECK(scaler.apply(outside)[0] == doctest::Approx(-0.5));
}

TEST_CASE("chi-square matches the closed-form 2x2 value") {
    const FeatureMatrix m = table_matrix(10, 20, 20, 10);
    const auto scores = chi_square_scores(m);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].score == doctest::Approx(6.666666666667).epsilon(1e-12));
}

TEST_CASE("chi-square equals the contingency formula on random binary matrices") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const FeatureMatrix m = testsupport::random_matrix(rng, 4 + rng() % 60, 6, 0.4, true);
        const auto scores = chi_square_scores(m, 1 + trial % 4);
        const auto dense = testsupport::to_dense(m);
        for (std::uint32_t col = 0; col < 6; ++col) {
            double a = 0, b = 0, c = 0, d = 0;
            for (std::size_t i = 0; i < m.n_rows(); ++i) {
                const bool has = dense[i][col] != 0.0;
                if (m.labels[i] == 1)
                    (has ? a : b) += 1.0;
                else
                    (has ? c : d) += 1.0;
            }
            CHECK(scores[col].score ==
                  doctest::Approx(testsupport::chi2_2x2(a, b, c, d)).epsilon(1e-9));
        }
    }
}

TEST_CASE("constant columns score zero and a single-class label set is rejected") {
    FeatureMatrix m = table_matrix(5, 0, 5, 0);  // feature always present
    CHECK(chi_square_scores(m)[0].score == 0.0);

    FeatureMatrix single = table_matrix(3, 3, 0, 0);
    CHECK_THROWS_AS(chi_square_scores(single), DataError);
}

TEST_CASE("top-k selection ranks by score, ties by column, output ascending") {
    const std::vector<ChiSquareScore> scores = {
        {0, 1.0}, {1, 9.0}, {2, 4.0}, {3, 9.0}, {4, 0.5}};
    CHECK(select_top_k(scores, 3) == std::vector<std::uint32_t>{1, 2, 3});
    CHECK(select_top_k(scores, 2) == std::vector<std::uint32_t>{1, 3});  // tie -> lower column
    CHECK(select_top_k(scores, 99) == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
}

TEST_CASE("pearson worked example and invariants") {
    const std::vector<std::string> names = {"x", "y"};
    const CorrelationMatrix cm =
        pearson_correlation_matrix(names, {{1, 2, 3}, {2, 4, 7}});
    CHECK(cm.values[0][1] == doctest::Approx(0.993399267799).epsilon(1e-12));
    CHECK(cm.values[1][0] == cm.values[0][1]);
    CHECK(cm.values[0][0] == 1.0);
    CHECK_FALSE(cm.constant[0]);
}

TEST_CASE("pearson on random data matches the reference and stays in [-1,1]") {
    std::mt19937_64 rng(29);
    std::vector<std::vector<double>> vars(4, std::vector<double>(50));
    for (auto& v : vars)
        for (double& x : v) x = static_cast<double>(rng() % 1000) / 100.0;
    vars[3] = vars[0];  // perfectly correlated pair
    const CorrelationMatrix cm =
        pearson_correlation_matrix({"a", "b", "c", "d"}, vars, 3);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(cm.values[i][j] ==
                  doctest::Approx(i == j ? 1.0 : testsupport::pearson_ref(vars[i], vars[j]))
                      .epsilon(1e-9));
            CHECK(cm.values[i][j] <= 1.0);
            CHECK(cm.values[i][j] >= -1.0);
        }
    CHECK(cm.values[0][3] == 1.0);  // clamped, not 1 + epsilon
}

TEST_CASE("constant variables are flagged and correlate 0") {
    const CorrelationMatrix cm =
        pearson_correlation_matrix({"k", "x"}, {{5, 5, 5}, {1, 2, 9}});
    CHECK(cm.constant[0]);
    CHECK_FALSE(cm.constant[1]);
    CHECK(cm.values[0][1] == 0.0);
    CHECK(cm.values[0][0] == 1.0);
}

TEST_CASE("pearson rejects mismatched or too-short input") {
    CHECK_THROWS_AS(pearson_correlation_matrix({"a", "b"}, {{1, 2}, {1}}), DataError);
    CHECK_THROWS_AS(pearson_correlation_matrix({"a"}, {{1}}), DataError);
}

TEST_CASE("correlation csv layout") {
    const CorrelationMatrix cm = pearson_correlation_matrix({"x", "y"}, {{1, 2, 3}, {2, 4, 7}});
    const std::string csv = cm.to_csv();
    CHECK(csv.substr(0, 13) == "variable,x,y\n");
    CHECK(csv.find("x,1.000000,0.993399\n") != std::string::npos);
}

TEST_CASE("assemble_matrix remaps dataset labels to spam-positive") {
    std::vector<SparseVector> text(2);
    text[0].dimension = text[1].dimension = 1;
    text[0].entries = {{0, 1.0}};
    const std::vector<std::string> terms = {"phone"};
    std::vector<BehavioralFeatures> behavioral(2);
    behavioral[0].review_length = 10;
    behavioral[1].review_length = 20;
    const BehavioralScaler scaler = BehavioralScaler::fit(behavioral);
    const std::vector<int> dataset_labels = {0, 1};  // 0 = spam in the dataset

    const FeatureMatrix m = assemble_matrix(std::move(text), terms, behavioral, scaler,
                                            dataset_labels);
    CHECK(m.labels == std::vector<int>{1, 0});  // spam is the positive class internally
    REQUIRE(m.column_names.size() == 5);
    CHECK(m.column_names[0] == "phone");
    CHECK(m.column_names[1] == "review_length");
    CHECK(m.column_names[4] == "reviewer_frequency");
    CHECK(m.dimension() == 5);
    CHECK(m.rows[0].at(0) == 1.0);
    CHECK(m.rows[0].at(1) == 0.0);  // scaled min
    CHECK(m.rows[1].at(1) == 1.0);  // scaled max
}

TEST_CASE("assemble_matrix projects onto selected columns") {
    std::vector<SparseVector> text(1);
    text[0].dimension = 3;
    text[0].entries = {{0, 0.5}, {2, 0.5}};
    const std::vector<std::string> terms = {"a", "b", "c"};
    std::vector<BehavioralFeatures> behavioral(1);
    const BehavioralScaler scaler = BehavioralScaler::fit(behavioral);
    const std::vector<int> labels = {0};

    const std::optional<std::vector<std::uint32_t>> selected =
        std::vector<std::uint32_t>{2, 3, 4, 5, 6};
    const FeatureMatrix m =
        assemble_matrix(std::move(text), terms, behavioral, scaler, labels, selected);
    CHECK(m.dimension() == 5);
    CHECK(m.column_names[0] == "c");
    CHECK(m.column_names[1] == "review_length");
    CHECK(m.rows[0].at(0) == 0.5);  // old column 2
}

TEST_CASE("assemble_matrix validates lengths and selection") {
    std::vector<SparseVector> text(2);
    text[0].dimension = text[1].dimension = 1;
    const std::vector<std::string> terms = {"t"};
    std::vector<BehavioralFeatures> behavioral(1);  // wrong length
    const BehavioralScaler scaler;
    const std::vector<int> labels = {0, 1};
    CHECK_THROWS_AS(assemble_matrix(std::move(text), terms, behavioral, scaler, labels),
                    DataError);

    std::vector<SparseVector> text2(1);
    text2[0].dimension = 1;
    std::vector<BehavioralFeatures> behavioral2(1);
    const std::vector<int> labels2 = {0};
    const std::optional<std::vector<std::uint32_t>> bad =
        std::vector<std::uint32_t>{3, 1};  // not ascending
    CHECK_THROWS_AS(
        assemble_matrix(std::move(text2), terms, behavioral2, scaler, labels2, bad),
        DataError);
}

} // TEST_SUITE
