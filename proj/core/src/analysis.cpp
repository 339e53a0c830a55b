#include "spamdet/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <tuple>
#include <unordered_map>

#include "internal/io_util.hpp"
#include "spamdet/errors.hpp"

namespace spamdet {

namespace {

// Proleptic-Gregorian date from days since 1970-01-01 (Euclidean-floor era
// arithmetic, valid far beyond the dataset's range).
std::pair<int, int> civil_year_month(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const auto doe = static_cast<std::uint64_t>(days - era * 146097);
    const std::uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::uint64_t mp = (5 * doy + 2) / 153;
    const auto m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    const auto y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
    return {y, m};
}

std::int64_t month_key(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) --days;
    const auto [y, m] = civil_year_month(days);
    return static_cast<std::int64_t>(y) * 12 + (m - 1);
}

} // namespace

std::vector<TimeSeriesPoint> monthly_series(std::span<const ReviewRecord> records) {
    if (records.empty()) return {};
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    std::vector<std::int64_t> keys;
    keys.reserve(records.size());
    for (const auto& r : records) {
        const std::int64_t k = month_key(r.unix_review_time);
        keys.push_back(k);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    std::vector<TimeSeriesPoint> series(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::int64_t k = lo + static_cast<std::int64_t>(i);
        // floor divide: keys are year*12 + (month-1), possibly negative
        std::int64_t y = k / 12;
        std::int64_t m = k % 12;
        if (m < 0) {
            m += 12;
            --y;
        }
        series[i].year = static_cast<int>(y);
        series[i].month = static_cast<int>(m) + 1;
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& point = series[static_cast<std::size_t>(keys[i] - lo)];
        ++point.total_reviews;
        if (records[i].label == 0) ++point.spam_reviews;
    }
    return series;
}

std::string time_series_to_csv(std::span<const TimeSeriesPoint> series) {
    std::string out = "year,month,total_reviews,spam_reviews\n";
    char buf[96];
    for (const auto& p : series) {
        std::snprintf(buf, sizeof buf, "%d,%d,%llu,%llu\n", p.year, p.month,
                      static_cast<unsigned long long>(p.total_reviews),
                      static_cast<unsigned long long>(p.spam_reviews));
        out += buf;
    }
    return out;
}

const char* to_string(ReviewerSegment::Name name) {
    switch (name) {
    case ReviewerSegment::Name::one_time: return "one_time";
    case ReviewerSegment::Name::occasional: return "occasional";
    case ReviewerSegment::Name::frequent: return "frequent";
    }
    return "unknown";
}

std::vector<ReviewerSegment> segment_reviewers(std::span<const ReviewRecord> records,
                                               std::uint32_t a, std::uint32_t b) {
    if (a < 1 || a >= b) throw DataError("segmentation bounds need 1 <= a < b");

    struct PerReviewer {
        std::uint64_t reviews = 0;
        std::uint64_t spam = 0;
    };
    std::unordered_map<std::string, PerReviewer> tally;
    tally.reserve(records.size());
    for (const auto& r : records) {
        auto& t = tally[r.reviewer_id];
        ++t.reviews;
        if (r.label == 0) ++t.spam;
    }

    std::vector<ReviewerSegment> segments(3);
    segments[0] = {ReviewerSegment::Name::one_time, 1, a, 0, 0, 0, 0.0};
    segments[1] = {ReviewerSegment::Name::occasional, a + 1, b, 0, 0, 0, 0.0};
    segments[2] = {ReviewerSegment::Name::frequent, b + 1, 0, 0, 0, 0, 0.0};
    for (const auto& [id, t] : tally) {
        auto& seg = segments[t.reviews <= a ? 0 : t.reviews <= b ? 1 : 2];
        ++seg.reviewer_count;
        seg.review_count += t.reviews;
        seg.spam_review_count += t.spam;
    }
    for (auto& seg : segments)
        seg.spam_rate = seg.review_count == 0 ? 0.0
                                              : static_cast<double>(seg.spam_review_count) /
                                                    static_cast<double>(seg.review_count);
    return segments;
}

std::string segments_to_csv(std::span<const ReviewerSegment> segments) {
    std::string out =
        "segment,lower_bound,upper_bound,reviewer_count,review_count,spam_review_count,"
        "spam_rate\n";
    for (const auto& s : segments) {
        out += to_string(s.name);
        char buf[160];
        if (s.upper_bound == 0)
            std::snprintf(buf, sizeof buf, ",%u,inf", s.lower_bound);
        else
            std::snprintf(buf, sizeof buf, ",%u,%u", s.lower_bound, s.upper_bound);
        out += buf;
        std::snprintf(buf, sizeof buf, ",%llu,%llu,%llu,",
                      static_cast<unsigned long long>(s.reviewer_count),
                      static_cast<unsigned long long>(s.review_count),
                      static_cast<unsigned long long>(s.spam_review_count));
        out += buf;
        out += detail::format_fixed(s.spam_rate, 6);
        out += '\n';
    }
    return out;
}

} // namespace spamdet
