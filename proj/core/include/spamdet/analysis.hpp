#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spamdet/corpus.hpp"

namespace spamdet {

struct TimeSeriesPoint {
    int year = 0;
    int month = 0;  // 1..12
    std::uint64_t total_reviews = 0;
    std::uint64_t spam_reviews = 0;  // dataset label 0
};

/// Buckets records by UTC calendar month, sorted chronologically. Months with no
/// reviews inside the observed range appear with zero counts (gap-free series).
std::vector<TimeSeriesPoint> monthly_series(std::span<const ReviewRecord> records);

std::string time_series_to_csv(std::span<const TimeSeriesPoint> series);

struct ReviewerSegment {
    enum class Name { one_time, occasional, frequent };
    Name name = Name::one_time;
    std::uint32_t lower_bound = 1;  // inclusive review count
    std::uint32_t upper_bound = 0;  // inclusive; 0 = unbounded
    std::uint64_t reviewer_count = 0;
    std::uint64_t review_count = 0;
    std::uint64_t spam_review_count = 0;
    double spam_rate = 0.0;  // spam reviews by members / reviews by members, 0/0 -> 0
};

const char* to_string(ReviewerSegment::Name name);

/// Partitions reviewers by review count: one_time [1,a], occasional (a,b],
/// frequent (b,inf). Requires 1 <= a < b (DataError otherwise). The three
/// segments always come back in that order and cover every reviewer exactly
/// once.
std::vector<ReviewerSegment> segment_reviewers(std::span<const ReviewRecord> records,
                                               std::uint32_t a, std::uint32_t b);

std::string segments_to_csv(std::span<const ReviewerSegment> segments);

} // namespace spamdet
