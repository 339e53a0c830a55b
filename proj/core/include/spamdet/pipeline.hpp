#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spamdet/analysis.hpp"
#include "spamdet/config.hpp"
#include "spamdet/corpus.hpp"
#include "spamdet/eval.hpp"
#include "spamdet/features.hpp"
#include "spamdet/models.hpp"
#include "spamdet/textproc.hpp"

namespace spamdet {

/// Artifact file names under the pipeline output directory.
namespace artifacts {
inline constexpr const char* train_corpus = "train.jsonl";
inline constexpr const char* test_corpus = "test.jsonl";
inline constexpr const char* stats = "stats.json";
inline constexpr const char* tfidf_model = "tfidf_model.json";
inline constexpr const char* feature_space = "feature_space.json";
inline constexpr const char* chi_square = "chi_square.csv";
inline constexpr const char* comparison = "comparison.csv";
inline constexpr const char* time_series = "time_series.csv";
inline constexpr const char* segments = "segments.csv";
inline constexpr const char* correlation = "correlation.csv";
inline constexpr const char* summary = "summary.json";
std::string model_file(const std::string& name);    // model_<name>.json
std::string metrics_file(const std::string& name);  // metrics_<name>.json
} // namespace artifacts

/// Everything fitted on the training split that test-time featurization needs.
struct FeatureSpace {
    TfIdfModel tfidf;
    ReviewerCounts reviewer_counts;
    BehavioralScaler scaler;
    std::vector<std::string> column_names;  // full space: terms + behavioral
    std::optional<std::vector<std::uint32_t>> selected;

    std::string to_json(const std::string& config_digest) const;
    static FeatureSpace from_json(std::string_view text, std::string* config_digest = nullptr);
};

struct FittedFeatures {
    FeatureSpace space;
    FeatureMatrix train_matrix;          // projected by space.selected
    std::vector<ChiSquareScore> scores;  // full-space chi-square ranking
};

/// Fits vocabulary, IDF, behavioral scaler, reviewer counts, and chi-square
/// selection on the training records only.
FittedFeatures fit_features(std::span<const ReviewRecord> train, const PipelineConfig& config,
                            unsigned workers);

/// Featurizes records through an already-fitted space (test-time path).
FeatureMatrix apply_features(std::span<const ReviewRecord> records, const FeatureSpace& space,
                             unsigned workers);

/// Review tokenization used for TF-IDF: review_text and summary are tokenized
/// separately (their lengths feed behavioral features) and concatenated.
TokenSeq document_tokens(const ReviewRecord& record);

// ---- stages ----------------------------------------------------------------

struct PrepareResult {
    CorpusStats load_stats;
    CorpusStats clean_stats;
    std::size_t train_records = 0;
    std::size_t test_records = 0;
};

/// load -> clean -> split; writes train.jsonl, test.jsonl, stats.json.
/// Rerunning with unchanged inputs produces byte-identical outputs.
PrepareResult run_prepare(const PipelineConfig& config);

struct TrainResult {
    struct ModelStatus {
        std::string name;
        bool ok = false;
        std::string error;  // set when !ok
    };
    std::size_t vocabulary_size = 0;
    std::size_t selected_columns = 0;
    std::vector<ModelStatus> models;

    bool all_ok() const;
};

/// Fits the feature space on the train split and trains every configured model.
/// A diverging model is reported in the result without aborting the others.
TrainResult run_train(const PipelineConfig& config);

struct EvaluateResult {
    ComparisonTable table;
};

/// Scores every trained model on the held-out test split at the configured
/// threshold; writes metrics_<model>.json per model plus comparison.csv.
EvaluateResult run_evaluate(const PipelineConfig& config);

struct AnalyzeResult {
    std::vector<TimeSeriesPoint> series;
    std::vector<ReviewerSegment> segments;
    CorrelationMatrix correlation;
};

/// Temporal and behavioral exploration over the full cleaned corpus
/// (train + test); writes time_series.csv, segments.csv, correlation.csv.
AnalyzeResult run_analyze(const PipelineConfig& config);

/// Aggregates the outputs of every completed stage into summary.json and
/// returns the JSON text.
std::string run_report(const PipelineConfig& config);

} // namespace spamdet
