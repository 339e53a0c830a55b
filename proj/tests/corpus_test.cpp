#include <fstream>
#include <set>

#include <zlib.h>

#include "doctest.h"

#include "spamdet/corpus.hpp"
#include "spamdet/errors.hpp"
#include "support/synth.hpp"
#include "support/tmpdir.hpp"

using namespace spamdet;

namespace {

const char* kGoodLine =
    R"({"reviewerID":"A1","asin":"B001","reviewText":"Nice phone case","summary":"Nice",)"
    R"("overall":5.0,"helpful":[2,3],"unixReviewTime":1357000000,"class":1})";

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

ReviewRecord make(const std::string& reviewer, const std::string& product, const std::string& text,
                  std::int64_t time, int label) {
    ReviewRecord r;
    r.reviewer_id = reviewer;
    r.product_id = product;
    r.review_text = text;
    r.summary = "s";
    r.rating = 4;
    r.unix_review_time = time;
    r.label = label;
    return r;
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("parse_line fills every field") {
    const auto r = parse_line(kGoodLine);
    REQUIRE(r.has_value());
    CHECK(r->reviewer_id == "A1");
    CHECK(r->product_id == "B001");
    CHECK(r->review_text == "Nice phone case");
    CHECK(r->summary == "Nice");
    CHECK(r->rating == 5);
    CHECK(r->helpful_votes == 2);
    CHECK(r->total_votes == 3);
    CHECK(r->unix_review_time == 1357000000);
    CHECK(r->label == 1);
}

TEST_CASE("parse_line rejects malformed input with a reason") {
    std::string why;
    CHECK_FALSE(parse_line("not json", &why).has_value());
    CHECK_FALSE(why.empty());
    CHECK_FALSE(parse_line(R"({"reviewerID":"A1"})").has_value());  // missing fields
    CHECK_FALSE(parse_line(
        R"({"reviewerID":"A1","asin":"B","reviewText":"x","summary":"s","overall":9,)"
        R"("helpful":[0,0],"unixReviewTime":1,"class":1})")
                    .has_value());  // rating out of range
    CHECK_FALSE(parse_line(
        R"({"reviewerID":"A1","asin":"B","reviewText":"x","summary":"s","overall":5,)"
        R"("helpful":[4,2],"unixReviewTime":1,"class":1})")
                    .has_value());  // helpful > total
    CHECK_FALSE(parse_line(
        R"({"reviewerID":"A1","asin":"B","reviewText":"x","summary":"s","overall":5,)"
        R"("helpful":[0,0],"unixReviewTime":1,"class":2})")
                    .has_value());  // label not 0/1
}

TEST_CASE("load_corpus skip policy counts malformed lines") {
    testsupport::TempDir dir;
    const std::string path = dir.file("c.jsonl");
    write_text(path, std::string(kGoodLine) + "\n{broken\n" + kGoodLine + "\n");
    const auto [records, stats] = load_corpus(path, ErrorPolicy::skip, 2);
    CHECK(records.size() == 2);
    CHECK(stats.total_read == 3);
    CHECK(stats.kept == 2);
    CHECK(stats.dropped_malformed == 1);
}

TEST_CASE("load_corpus abort policy names the offending line") {
    testsupport::TempDir dir;
    const std::string path = dir.file("c.jsonl");
    write_text(path, std::string(kGoodLine) + "\n{broken\n");
    CHECK_THROWS_WITH_AS(load_corpus(path, ErrorPolicy::abort),
                         doctest::Contains("line 2"), DataError);
}

TEST_CASE("load_corpus missing file") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/x.jsonl"), DataError);
}

TEST_CASE("gzip input is detected by magic bytes") {
    testsupport::TempDir dir;
    const auto records = testsupport::synth_corpus({.n_records = 50, .seed = 3});
    const std::string text = testsupport::to_jsonl(records);

    const std::string gz_path = dir.file("c.jsonl.gz");
    gzFile gz = gzopen(gz_path.c_str(), "wb");
    REQUIRE(gz != nullptr);
    REQUIRE(gzwrite(gz, text.data(), static_cast<unsigned>(text.size())) ==
            static_cast<int>(text.size()));
    gzclose(gz);

    const auto [loaded, stats] = load_corpus(gz_path, ErrorPolicy::abort, 3);
    CHECK(stats.kept == 50);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].reviewer_id == records[i].reviewer_id);
        CHECK(loaded[i].review_text == records[i].review_text);
        CHECK(loaded[i].unix_review_time == records[i].unix_review_time);
    }
}

TEST_CASE("load preserves file order regardless of worker count") {
    testsupport::TempDir dir;
    const auto records = testsupport::synth_corpus({.n_records = 500, .seed = 9});
    const std::string path = dir.file("c.jsonl");
    testsupport::write_jsonl(path, records);
    const auto [one, s1] = load_corpus(path, ErrorPolicy::abort, 1);
    const auto [four, s4] = load_corpus(path, ErrorPolicy::abort, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].reviewer_id == four[i].reviewer_id);
        CHECK(one[i].review_text == four[i].review_text);
    }
}

TEST_CASE("clean drops blank reviews then exact duplicates, keeping first") {
    std::vector<ReviewRecord> in = {
        make("A", "P1", "good phone", 100, 1),
        make("A", "P1", "good phone", 100, 1),  // duplicate
        make("B", "P1", "   ", 50, 0),          // whitespace-only
        make("B", "P2", "", 60, 0),             // empty
        make("A", "P1", "good phone", 200, 1),  // same text, different time: kept
    };
    const auto [kept, stats] = clean(std::move(in));
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].unix_review_time == 100);
    CHECK(kept[1].unix_review_time == 200);
    CHECK(stats.total_read == 5);
    CHECK(stats.kept == 2);
    CHECK(stats.dropped_null == 2);
    CHECK(stats.dropped_duplicate == 1);
    CHECK(stats.total_read ==
          stats.kept + stats.dropped_null + stats.dropped_duplicate + stats.dropped_malformed);
}

TEST_CASE("stratified split preserves class proportions and input order") {
    std::vector<ReviewRecord> records;
    for (int i = 0; i < 100; ++i)
        records.push_back(make("R" + std::to_string(i), "P", "text " + std::to_string(i), i,
                               i % 4 == 0 ? 0 : 1));  // 25 spam, 75 ham
    const auto [train, test] = split(records, {.train_fraction = 0.8, .seed = 11});
    CHECK(train.size() == 80);
    CHECK(test.size() == 20);

    const auto spam_count = [](const std::vector<ReviewRecord>& v) {
        std::size_t n = 0;
        for (const auto& r : v) n += r.label == 0;
        return n;
    };
    CHECK(spam_count(train) == 20);
    CHECK(spam_count(test) == 5);

    const auto ordered = [](const std::vector<ReviewRecord>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i - 1].unix_review_time >= v[i].unix_review_time) return false;
        return true;
    };
    CHECK(ordered(train));
    CHECK(ordered(test));

    std::set<std::string> seen;
    for (const auto& r : train) seen.insert(r.reviewer_id);
    for (const auto& r : test) seen.insert(r.reviewer_id);
    CHECK(seen.size() == 100);  // a partition, nothing lost or duplicated
}

TEST_CASE("split is deterministic per seed and sensitive to it") {
    const auto records = testsupport::synth_corpus({.n_records = 300, .seed = 21});
    const auto [a_train, a_test] = split(records, {.train_fraction = 0.7, .seed = 5});
    const auto [b_train, b_test] = split(records, {.train_fraction = 0.7, .seed = 5});
    REQUIRE(a_train.size() == b_train.size());
    bool same = true;
    for (std::size_t i = 0; i < a_train.size(); ++i)
        same = same && a_train[i].reviewer_id == b_train[i].reviewer_id &&
               a_train[i].unix_review_time == b_train[i].unix_review_time;
    CHECK(same);

    const auto [c_train, c_test] = split(records, {.train_fraction = 0.7, .seed = 6});
    REQUIRE(c_train.size() == a_train.size());
    bool identical = true;
    for (std::size_t i = 0; i < a_train.size(); ++i)
        identical = identical && a_train[i].review_text == c_train[i].review_text;
    CHECK_FALSE(identical);
}

TEST_CASE("stratified split refuses a class with fewer than 2 members") {
    std::vector<ReviewRecord> records = {make("A", "P", "x", 1, 0), make("B", "P", "y", 2, 1),
                                         make("C", "P", "z", 3, 1)};
    CHECK_THROWS_AS(split(records, {.train_fraction = 0.5, .seed = 1, .stratified = true}),
                    DataError);
    CHECK_NOTHROW(split(records, {.train_fraction = 0.5, .seed = 1, .stratified = false}));
}

} // TEST_SUITE
