#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spamdet/corpus.hpp"
#include "spamdet/sparse.hpp"

namespace spamdet {

/// The four behavioral columns appended after the TF-IDF block, in matrix order.
inline constexpr std::array<const char*, 4> kBehavioralNames = {
    "review_length", "summary_length", "helpfulness_ratio", "reviewer_frequency"};

struct BehavioralFeatures {
    std::uint32_t review_length = 0;   // tokens in review_text, before stop-word removal
    std::uint32_t summary_length = 0;  // tokens in summary
    double helpfulness_ratio = 0.0;    // helpful/total, 0/0 -> 0
    std::uint32_t reviewer_frequency = 0;

    std::array<double, 4> as_array() const {
        return {static_cast<double>(review_length), static_cast<double>(summary_length),
                helpfulness_ratio, static_cast<double>(reviewer_frequency)};
    }
};

using ReviewerCounts = std::unordered_map<std::string, std::uint32_t>;

/// Reviews-per-reviewer tally. Build this over the training corpus only;
/// reviewers unseen at training time look up as 0.
ReviewerCounts count_reviewers(std::span<const ReviewRecord> records);

BehavioralFeatures behavioral_features(const ReviewRecord& record,
                                       const ReviewerCounts& reviewer_counts);

/// Min-max bounds fitted on the training behavioral block. apply() maps the
/// training min to 0 and max to 1; a constant column maps to all zeros. Test
/// values may fall outside [0,1] and are not clipped.
struct BehavioralScaler {
    std::array<double, 4> min{};
    std::array<double, 4> max{};

    static BehavioralScaler fit(std::span<const BehavioralFeatures> block);
    std::array<double, 4> apply(const BehavioralFeatures& f) const;
};

/// Rows share one dimension; labels are in the internal spam-positive
/// orientation (1 = spam). The dataset's 0=spam encoding is remapped here, at
/// assembly, and nowhere else.
struct FeatureMatrix {
    std::vector<SparseVector> rows;
    std::vector<int> labels;
    std::vector<std::string> column_names;

    std::uint32_t dimension() const {
        return rows.empty() ? static_cast<std::uint32_t>(column_names.size()) : rows[0].dimension;
    }
    std::size_t n_rows() const { return rows.size(); }
};

struct ChiSquareScore {
    std::uint32_t column = 0;
    double score = 0.0;  // >= 0
};

/// Per-column chi-square association with the binary label, for non-negative
/// features in [0,1]: each row contributes presence x and absence 1-x, giving a
/// 2x2 observed table (present/absent x class) tested against independence.
/// For 0/1 features this is exactly the classic contingency statistic
/// N(ad-bc)^2 / ((a+b)(c+d)(a+c)(b+d)). Cells with zero expectation contribute
/// nothing, so constant columns score 0. Fixed-chunk accumulation keeps scores
/// identical across worker counts. Throws DataError on a single-class label
/// vector.
std::vector<ChiSquareScore> chi_square_scores(const FeatureMatrix& matrix, unsigned workers = 1);

/// Indices of the k highest scores (ties by ascending column), returned sorted
/// ascending. k >= column count returns every column.
std::vector<std::uint32_t> select_top_k(const std::vector<ChiSquareScore>& scores, std::uint32_t k);

struct CorrelationMatrix {
    std::vector<std::string> variable_names;
    std::vector<std::vector<double>> values;  // symmetric, unit diagonal
    std::vector<bool> constant;               // flagged: zero variance, correlations forced to 0

    std::string to_csv() const;
};

/// Pairwise Pearson coefficients. A constant variable correlates 0 with every
/// other variable and 1 with itself, and is flagged. All sequences must share
/// one length >= 2; throws DataError otherwise.
CorrelationMatrix pearson_correlation_matrix(const std::vector<std::string>& names,
                                             const std::vector<std::vector<double>>& variables,
                                             unsigned workers = 1);

/// Glues TF-IDF rows, scaled behavioral columns, and remapped labels into one
/// matrix: columns = [terms..., review_length, summary_length,
/// helpfulness_ratio, reviewer_frequency]. `selected`, when given, projects onto
/// those columns (ascending), keeping names aligned. Dataset labels come in as
/// 0=spam/1=non-spam and are stored spam-positive.
FeatureMatrix assemble_matrix(std::vector<SparseVector> text_vectors,
                              std::span<const std::string> term_names,
                              std::span<const BehavioralFeatures> behavioral,
                              const BehavioralScaler& scaler, std::span<const int> dataset_labels,
                              const std::optional<std::vector<std::uint32_t>>& selected = {});

} // namespace spamdet
