#include <random>

#include "json.hpp"

#include "doctest.h"

#include "spamdet/errors.hpp"
#include "spamdet/eval.hpp"
#include "support/oracles.hpp"

using namespace spamdet;

TEST_SUITE("eval") {

TEST_CASE("confusion counts with threshold-at-score positive") {
    const std::vector<double> scores = {0.9, 0.5, 0.49, 0.1};
    const std::vector<int> labels = {1, 0, 1, 0};
    const ConfusionMatrix cm = confusion(scores, labels, 0.5);
    CHECK(cm.tp == 1);  // 0.9 vs 1
    CHECK(cm.fp == 1);  // 0.5 vs 0: exact threshold is positive
    CHECK(cm.fn == 1);  // 0.49 vs 1
    CHECK(cm.tn == 1);  // 0.1 vs 0
}

TEST_CASE("confusion rejects mismatched lengths") {
    CHECK_THROWS_AS(confusion(std::vector<double>{0.5}, std::vector<int>{1, 0}, 0.5), DataError);
}

TEST_CASE("worked metrics example") {
    const MetricsReport r = metrics({.tp = 50, .fp = 10, .tn = 30, .fn = 10}, "demo");
    CHECK(r.accuracy == doctest::Approx(0.8));
    CHECK(r.precision == doctest::Approx(0.833333333333).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.833333333333).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(0.833333333333).epsilon(1e-12));
    CHECK(r.model_name == "demo");
}

TEST_CASE("metrics match the rational oracle on random confusion matrices") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 300; ++trial) {
        const ConfusionMatrix cm = {rng() % 40, rng() % 40, rng() % 40, rng() % 40};
        if (cm.total() == 0) continue;
        const MetricsReport got = metrics(cm);
        const testsupport::RationalMetrics want = testsupport::rational_metrics(cm);
        const auto same = [](const std::optional<double>& g,
                             const std::optional<std::pair<std::uint64_t, std::uint64_t>>& w) {
            if (g.has_value() != w.has_value()) return false;
            if (!g) return true;
            return *g == static_cast<double>(w->first) / static_cast<double>(w->second);
        };
        CHECK(same(got.accuracy, want.accuracy));
        CHECK(same(got.precision, want.precision));
        CHECK(same(got.recall, want.recall));
        CHECK(same(got.f1, want.f1));
    }
}

TEST_CASE("undefined metrics are null, never zero") {
    // no predicted positives: precision undefined, recall 0
    const MetricsReport r = metrics({.tp = 0, .fp = 0, .tn = 5, .fn = 5}, "m");
    CHECK(r.accuracy == doctest::Approx(0.5));
    CHECK_FALSE(r.precision.has_value());
    REQUIRE(r.recall.has_value());
    CHECK(*r.recall == 0.0);
    CHECK_FALSE(r.f1.has_value());  // P undefined

    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j.at("precision").is_null());
    CHECK(j.at("recall").get<double>() == 0.0);
    CHECK(j.at("confusion").at("tn").get<int>() == 5);
}

TEST_CASE("comparison table sorts by accuracy then name") {
    std::vector<MetricsReport> reports;
    reports.push_back(metrics({.tp = 5, .fp = 5, .tn = 0, .fn = 0}, "zeta"));   // 0.5
    reports.push_back(metrics({.tp = 9, .fp = 1, .tn = 0, .fn = 0}, "beta"));   // 0.9
    reports.push_back(metrics({.tp = 9, .fp = 1, .tn = 0, .fn = 0}, "alpha"));  // 0.9
    const ComparisonTable table = compare_models(std::move(reports));
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].model_name == "alpha");
    CHECK(table.rows[1].model_name == "beta");
    CHECK(table.rows[2].model_name == "zeta");
}

TEST_CASE("comparison csv renders percentages and empty undefined cells") {
    std::vector<MetricsReport> reports;
    reports.push_back(metrics({.tp = 0, .fp = 0, .tn = 9035, .fn = 965}, "m"));
    const std::string csv = compare_models(std::move(reports)).to_csv();
    CHECK(csv == "model,accuracy,precision,recall,f1\nm,90.35,,0.00,\n");
}

} // TEST_SUITE
