#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spamdet {

/// One labeled Amazon-style product review. `label` keeps the dataset encoding:
/// 0 = spam, 1 = non-spam. The spam-positive remap for model training happens in
/// one place only, at feature-matrix assembly.
struct ReviewRecord {
    std::string reviewer_id;
    std::string product_id;
    std::string review_text;
    std::string summary;
    int rating = 0;                  // 1..5
    std::int64_t helpful_votes = 0;  // <= total_votes
    std::int64_t total_votes = 0;
    std::int64_t unix_review_time = 0;
    int label = 0;                   // 0 = spam, 1 = non-spam
};

/// Per-stage ingest accounting. total_read is always the sum of the other four.
struct CorpusStats {
    std::uint64_t total_read = 0;
    std::uint64_t kept = 0;
    std::uint64_t dropped_null = 0;
    std::uint64_t dropped_duplicate = 0;
    std::uint64_t dropped_malformed = 0;
};

struct SplitSpec {
    double train_fraction = 0.8;  // in (0,1)
    std::uint64_t seed = 42;
    bool stratified = true;
};

enum class ErrorPolicy { skip, abort };

/// Parses one JSONL review object. Returns nullopt on malformed JSON, a missing
/// required field, or an invariant violation (rating outside 1..5,
/// helpful > total, label not 0/1); the reason lands in *error when given.
/// Unknown fields are ignored. Never returns a partially filled record.
std::optional<ReviewRecord> parse_line(std::string_view line, std::string* error = nullptr);

/// Streams a newline-delimited JSON file (gzip auto-detected by magic bytes) into
/// records. Output order equals file order; parsing runs on `workers` threads in
/// order-restoring chunks. With ErrorPolicy::abort the first malformed line
/// raises DataError naming its line number; with skip it is only counted.
std::pair<std::vector<ReviewRecord>, CorpusStats>
load_corpus(const std::string& path, ErrorPolicy on_error = ErrorPolicy::skip,
            unsigned workers = 1);

/// Drops records whose review_text is empty or whitespace-only (dropped_null),
/// then exact duplicates on (reviewer_id, product_id, unix_review_time,
/// review_text) keeping the first occurrence (dropped_duplicate). Stable order.
std::pair<std::vector<ReviewRecord>, CorpusStats> clean(std::vector<ReviewRecord> records);

/// Deterministic train/test split. Stratified mode splits each label class
/// separately so class proportions are preserved within one record. Both
/// partitions keep the input's relative record order. Throws DataError when a
/// class has fewer than 2 members under stratification.
std::pair<std::vector<ReviewRecord>, std::vector<ReviewRecord>>
split(const std::vector<ReviewRecord>& records, const SplitSpec& spec);

} // namespace spamdet
