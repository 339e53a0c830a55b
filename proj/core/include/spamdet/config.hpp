#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spamdet/corpus.hpp"
#include "spamdet/models.hpp"

namespace spamdet {

/// One entry of the pipeline's model list.
struct ModelSpec {
    std::string name;  // lr | svm | dt | rf | gb
    TrainConfig train;
};

/// Resolved pipeline configuration. Loaded from a flat `key = value` file
/// (# comments, unknown keys rejected), then overridden by CLI flags. Every
/// paper-silent hyperparameter lives here with its default; the full schema is
/// documented in the README.
struct PipelineConfig {
    std::string input_path;
    std::string output_dir;
    std::uint64_t seed = 42;
    unsigned worker_count = 0;  // 0 = hardware concurrency
    ErrorPolicy on_error = ErrorPolicy::skip;

    double split_fraction = 0.8;
    bool split_stratified = true;

    std::uint32_t vocab_max_terms = 20000;
    std::uint32_t vocab_min_df = 2;
    std::uint32_t selection_k = 2000;  // text columns kept; behavioral always kept

    double threshold = 0.5;

    std::uint32_t segment_a = 1;  // one_time: [1,a]
    std::uint32_t segment_b = 5;  // occasional: (a,b]

    std::vector<ModelSpec> models;  // default: lr,svm,dt,rf,gb

    /// Defaults with the model list fully populated.
    static PipelineConfig defaults();

    /// Parses a config file into defaults(). Throws UsageError on unknown keys,
    /// bad values, or unreadable files.
    static PipelineConfig from_file(const std::string& path);

    /// Validates ranges and required fields for a pipeline run.
    void validate() const;

    /// Canonical sorted `key=value` serialization of everything that shapes
    /// results given the upstream artifacts. Plumbing (input_path, output_dir,
    /// worker_count, on_error) is excluded: moving or re-ingesting the corpus
    /// and changing the worker count must keep one digest.
    std::string canonical_semantic() const;

    /// FNV-1a 64 over canonical_semantic(), as 16 hex chars. Stage artifacts
    /// embed it, and downstream stages refuse inputs whose digest mismatches.
    std::string digest() const;

    SplitSpec split_spec() const { return SplitSpec{split_fraction, seed, split_stratified}; }
};

} // namespace spamdet
