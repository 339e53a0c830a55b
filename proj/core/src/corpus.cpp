#include "spamdet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <unordered_set>

#include "json.hpp"

#include "internal/line_reader.hpp"
#include "spamdet/errors.hpp"
#include "spamdet/parallel.hpp"

namespace spamdet {

namespace {

using nlohmann::json;

bool as_int64(const json& v, std::int64_t& out) {
    if (v.is_number_integer()) {
        out = v.get<std::int64_t>();
        return true;
    }
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (!std::isfinite(d) || d != std::floor(d) || std::abs(d) > 9.2e18) return false;
        out = static_cast<std::int64_t>(d);
        return true;
    }
    return false;
}

std::optional<ReviewRecord> fail(std::string* error, const char* reason) {
    if (error != nullptr) *error = reason;
    return std::nullopt;
}

bool whitespace_only(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

/// Dedup key: (reviewer_id, product_id, unix_review_time, review_text).
struct DupKeyHash {
    const std::vector<ReviewRecord>* records;
    std::size_t operator()(std::size_t i) const {
        const ReviewRecord& r = (*records)[i];
        std::size_t h = std::hash<std::string>{}(r.reviewer_id);
        auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
        mix(std::hash<std::string>{}(r.product_id));
        mix(std::hash<std::int64_t>{}(r.unix_review_time));
        mix(std::hash<std::string>{}(r.review_text));
        return h;
    }
};

struct DupKeyEq {
    const std::vector<ReviewRecord>* records;
    bool operator()(std::size_t a, std::size_t b) const {
        const ReviewRecord& x = (*records)[a];
        const ReviewRecord& y = (*records)[b];
        return x.reviewer_id == y.reviewer_id && x.product_id == y.product_id &&
               x.unix_review_time == y.unix_review_time && x.review_text == y.review_text;
    }
};

/// Portable Fisher-Yates; mt19937_64's output sequence is pinned by the
/// standard, unlike std::shuffle's, and the split contract promises
/// byte-reproducible partitions.
void deterministic_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng() % i;
        std::swap(v[i - 1], v[j]);
    }
}

std::size_t train_count(double fraction, std::size_t n) {
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n - 1);
}

} // namespace

std::optional<ReviewRecord> parse_line(std::string_view line, std::string* error) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return fail(error, "malformed JSON");

    ReviewRecord r;
    auto it = j.find("reviewerID");
    if (it == j.end() || !it->is_string()) return fail(error, "missing reviewerID");
    r.reviewer_id = it->get<std::string>();

    it = j.find("asin");
    if (it == j.end() || !it->is_string()) return fail(error, "missing asin");
    r.product_id = it->get<std::string>();

    it = j.find("reviewText");
    if (it == j.end() || !it->is_string()) return fail(error, "missing reviewText");
    r.review_text = it->get<std::string>();

    it = j.find("summary");
    if (it == j.end() || !it->is_string()) return fail(error, "missing summary");
    r.summary = it->get<std::string>();

    std::int64_t rating = 0;
    it = j.find("overall");
    if (it == j.end() || !as_int64(*it, rating)) return fail(error, "missing overall");
    if (rating < 1 || rating > 5) return fail(error, "rating out of range 1..5");
    r.rating = static_cast<int>(rating);

    it = j.find("helpful");
    if (it == j.end() || !it->is_array() || it->size() != 2)
        return fail(error, "helpful must be [helpful_votes, total_votes]");
    std::int64_t helpful = 0;
    std::int64_t total = 0;
    if (!as_int64((*it)[0], helpful) || !as_int64((*it)[1], total))
        return fail(error, "helpful must be [helpful_votes, total_votes]");
    if (helpful < 0 || total < 0) return fail(error, "negative helpfulness votes");
    if (helpful > total) return fail(error, "helpful_votes > total_votes");
    r.helpful_votes = helpful;
    r.total_votes = total;

    it = j.find("unixReviewTime");
    if (it == j.end() || !as_int64(*it, r.unix_review_time))
        return fail(error, "missing unixReviewTime");

    std::int64_t label = 0;
    it = j.find("class");
    if (it == j.end() || !as_int64(*it, label)) return fail(error, "missing class");
    if (label != 0 && label != 1) return fail(error, "class must be 0 or 1");
    r.label = static_cast<int>(label);

    if (r.reviewer_id.empty() || r.product_id.empty())
        return fail(error, "empty reviewerID or asin");
    return r;
}

std::pair<std::vector<ReviewRecord>, CorpusStats>
load_corpus(const std::string& path, ErrorPolicy on_error, unsigned workers) {
    detail::LineReader reader(path);
    std::vector<ReviewRecord> out;
    CorpusStats stats;

    constexpr std::size_t kBatch = 16384;
    std::vector<std::string> lines;
    std::vector<std::optional<ReviewRecord>> parsed;
    std::vector<std::string> errors;
    std::uint64_t line_no = 0;

    lines.reserve(kBatch);
    while (true) {
        lines.clear();
        if (!reader.next_batch(lines, kBatch)) break;

        parsed.assign(lines.size(), std::nullopt);
        errors.assign(lines.size(), {});
        parallel_for_each(
            lines.size(), workers, [&](std::size_t i) { parsed[i] = parse_line(lines[i], &errors[i]); },
            /*grain=*/256);

        // Results drain in slot order, so output order equals file order no
        // matter how the batch was scheduled.
        for (std::size_t i = 0; i < lines.size(); ++i) {
            ++line_no;
            ++stats.total_read;
            if (parsed[i].has_value()) {
                out.push_back(std::move(*parsed[i]));
                ++stats.kept;
            } else {
                ++stats.dropped_malformed;
                if (on_error == ErrorPolicy::abort)
                    throw DataError(path + ": line " + std::to_string(line_no) + ": " + errors[i]);
            }
        }
    }
    return {std::move(out), stats};
}

std::pair<std::vector<ReviewRecord>, CorpusStats> clean(std::vector<ReviewRecord> records) {
    CorpusStats stats;
    stats.total_read = records.size();

    std::vector<ReviewRecord> out;
    out.reserve(records.size());
    std::unordered_set<std::size_t, DupKeyHash, DupKeyEq> seen(
        records.size() * 2 + 1, DupKeyHash{&out}, DupKeyEq{&out});

    for (auto& r : records) {
        if (whitespace_only(r.review_text)) {
            ++stats.dropped_null;
            continue;
        }
        out.push_back(std::move(r));
        if (!seen.insert(out.size() - 1).second) {
            out.pop_back();
            ++stats.dropped_duplicate;
        }
    }
    stats.kept = out.size();
    return {std::move(out), stats};
}

std::pair<std::vector<ReviewRecord>, std::vector<ReviewRecord>>
split(const std::vector<ReviewRecord>& records, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw DataError("train_fraction must be in (0,1)");
    if (records.size() < 2) throw DataError("cannot split fewer than 2 records");

    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;

    if (spec.stratified) {
        for (int cls : {0, 1}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < records.size(); ++i)
                if (records[i].label == cls) idx.push_back(i);
            if (idx.empty()) continue;
            if (idx.size() < 2)
                throw DataError("stratified split needs >=2 records of class " +
                                std::to_string(cls));
            deterministic_shuffle(idx, rng);
            std::size_t k = train_count(spec.train_fraction, idx.size());
            train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
            test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
        }
    } else {
        std::vector<std::size_t> idx(records.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        deterministic_shuffle(idx, rng);
        std::size_t k = train_count(spec.train_fraction, idx.size());
        train_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        test_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }

    // Partitions keep the input's relative order.
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    std::vector<ReviewRecord> train;
    std::vector<ReviewRecord> test;
    train.reserve(train_idx.size());
    test.reserve(test_idx.size());
    for (std::size_t i : train_idx) train.push_back(records[i]);
    for (std::size_t i : test_idx) test.push_back(records[i]);
    return {std::move(train), std::move(test)};
}

} // namespace spamdet
