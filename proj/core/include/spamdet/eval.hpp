#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spamdet {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

/// The four scores derived from a confusion matrix. nullopt marks an undefined
/// value (zero denominator) -- never silently 0.
struct MetricsReport {
    std::string model_name;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    ConfusionMatrix confusion;

    std::string to_json() const;
};

/// Exact integer accounting. Labels must already be in the internal
/// spam-positive orientation; a score exactly at the threshold counts as
/// predicted positive. Throws DataError on length mismatch.
ConfusionMatrix confusion(std::span<const double> predictions, std::span<const int> labels,
                          double threshold);

/// accuracy = (tp+tn)/total, precision = tp/(tp+fp), recall = tp/(tp+fn),
/// f1 = 2PR/(P+R). Each is nullopt when its denominator is zero.
MetricsReport metrics(const ConfusionMatrix& cm, std::string model_name = {});

/// Rows sorted by descending accuracy, ties by model name ascending.
struct ComparisonTable {
    std::vector<MetricsReport> rows;

    /// CSV with header model,accuracy,precision,recall,f1; values rendered as
    /// percentages with 2 decimals, undefined cells left empty.
    std::string to_csv() const;
};

ComparisonTable compare_models(std::vector<MetricsReport> reports);

} // namespace spamdet
