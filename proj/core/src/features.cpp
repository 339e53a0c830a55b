#include "spamdet/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "internal/io_util.hpp"
#include "spamdet/errors.hpp"
#include "spamdet/parallel.hpp"
#include "spamdet/textproc.hpp"

namespace spamdet {

ReviewerCounts count_reviewers(std::span<const ReviewRecord> records) {
    ReviewerCounts counts;
    counts.reserve(records.size());
    for (const auto& r : records) ++counts[r.reviewer_id];
    return counts;
}

BehavioralFeatures behavioral_features(const ReviewRecord& record,
                                       const ReviewerCounts& reviewer_counts) {
    BehavioralFeatures f;
    f.review_length = static_cast<std::uint32_t>(tokenize(record.review_text).size());
    f.summary_length = static_cast<std::uint32_t>(tokenize(record.summary).size());
    f.helpfulness_ratio =
        record.total_votes == 0
            ? 0.0
            : static_cast<double>(record.helpful_votes) / static_cast<double>(record.total_votes);
    auto it = reviewer_counts.find(record.reviewer_id);
    f.reviewer_frequency = it == reviewer_counts.end() ? 0 : it->second;
    return f;
}

BehavioralScaler BehavioralScaler::fit(std::span<const BehavioralFeatures> block) {
    BehavioralScaler s;
    if (block.empty()) return s;
    s.min.fill(std::numeric_limits<double>::infinity());
    s.max.fill(-std::numeric_limits<double>::infinity());
    for (const auto& f : block) {
        auto vals = f.as_array();
        for (std::size_t c = 0; c < vals.size(); ++c) {
            s.min[c] = std::min(s.min[c], vals[c]);
            s.max[c] = std::max(s.max[c], vals[c]);
        }
    }
    return s;
}

std::array<double, 4> BehavioralScaler::apply(const BehavioralFeatures& f) const {
    auto vals = f.as_array();
    std::array<double, 4> out{};
    for (std::size_t c = 0; c < vals.size(); ++c) {
        const double range = max[c] - min[c];
        out[c] = range > 0.0 ? (vals[c] - min[c]) / range : 0.0;
    }
    return out;
}

std::vector<ChiSquareScore> chi_square_scores(const FeatureMatrix& matrix, unsigned workers) {
    const std::size_t n = matrix.n_rows();
    const std::uint32_t dim = matrix.dimension();

    std::uint64_t n_pos = 0;
    for (int y : matrix.labels) n_pos += static_cast<std::uint64_t>(y);
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("chi-square needs both label classes");

    // Class-conditional feature sums, accumulated over fixed chunks and merged
    // in chunk order so every worker count produces the same doubles.
    struct Sums {
        std::vector<double> pos, neg;
    };
    Sums sums = chunked_reduce<Sums>(
        n, workers, Sums{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)},
        [&](std::size_t begin, std::size_t end) {
            Sums local{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
            for (std::size_t i = begin; i < end; ++i) {
                auto& acc = matrix.labels[i] == 1 ? local.pos : local.neg;
                for (const auto& e : matrix.rows[i].entries) acc[e.index] += e.value;
            }
            return local;
        },
        [dim](Sums& acc, Sums& part) {
            for (std::uint32_t j = 0; j < dim; ++j) {
                acc.pos[j] += part.pos[j];
                acc.neg[j] += part.neg[j];
            }
        });

    // Each row contributes presence x and absence 1-x, making a 2x2 table
    // (present/absent x class); chi^2 sums (O-E)^2/E over cells with E > 0.
    const double total = static_cast<double>(n);
    const double cls[2] = {static_cast<double>(n_neg), static_cast<double>(n_pos)};
    std::vector<ChiSquareScore> scores(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
        const double present[2] = {sums.neg[j], sums.pos[j]};
        const double row1 = present[0] + present[1];
        const double row0 = total - row1;
        double chi2 = 0.0;
        for (int c = 0; c < 2; ++c) {
            const double e1 = row1 * cls[c] / total;
            const double e0 = row0 * cls[c] / total;
            if (e1 > 0.0) {
                const double d = present[c] - e1;
                chi2 += d * d / e1;
            }
            if (e0 > 0.0) {
                const double d = (cls[c] - present[c]) - e0;
                chi2 += d * d / e0;
            }
        }
        scores[j] = {j, chi2};
    }
    return scores;
}

std::vector<std::uint32_t> select_top_k(const std::vector<ChiSquareScore>& scores,
                                        std::uint32_t k) {
    std::vector<ChiSquareScore> ranked(scores);
    std::sort(ranked.begin(), ranked.end(), [](const ChiSquareScore& a, const ChiSquareScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.column < b.column;
    });
    if (k < ranked.size()) ranked.resize(k);
    std::vector<std::uint32_t> out;
    out.reserve(ranked.size());
    for (const auto& s : ranked) out.push_back(s.column);
    std::sort(out.begin(), out.end());
    return out;
}

CorrelationMatrix pearson_correlation_matrix(const std::vector<std::string>& names,
                                             const std::vector<std::vector<double>>& variables,
                                             unsigned workers) {
    const std::size_t k = variables.size();
    if (names.size() != k) throw DataError("correlation: names/variables length mismatch");
    if (k == 0) return {};
    const std::size_t n = variables[0].size();
    if (n < 2) throw DataError("correlation needs sequences of length >= 2");
    for (const auto& v : variables)
        if (v.size() != n) throw DataError("correlation: sequences must share one length");

    // Flattened moment accumulator: per-variable sum/sumsq/min/max, pairwise
    // sum of products. Fixed-chunk merge keeps doubles worker-count-stable.
    struct Moments {
        std::vector<double> sum, sumsq, mn, mx, cross;  // cross: upper triangle
    };
    const std::size_t n_pairs = k * (k - 1) / 2;
    auto make = [&] {
        Moments m;
        m.sum.assign(k, 0.0);
        m.sumsq.assign(k, 0.0);
        m.mn.assign(k, std::numeric_limits<double>::infinity());
        m.mx.assign(k, -std::numeric_limits<double>::infinity());
        m.cross.assign(n_pairs, 0.0);
        return m;
    };
    Moments m = chunked_reduce<Moments>(
        n, workers, make(),
        [&](std::size_t begin, std::size_t end) {
            Moments local = make();
            for (std::size_t i = begin; i < end; ++i) {
                std::size_t p = 0;
                for (std::size_t a = 0; a < k; ++a) {
                    const double x = variables[a][i];
                    local.sum[a] += x;
                    local.sumsq[a] += x * x;
                    local.mn[a] = std::min(local.mn[a], x);
                    local.mx[a] = std::max(local.mx[a], x);
                    for (std::size_t b = a + 1; b < k; ++b, ++p)
                        local.cross[p] += x * variables[b][i];
                }
            }
            return local;
        },
        [&](Moments& acc, Moments& part) {
            for (std::size_t a = 0; a < k; ++a) {
                acc.sum[a] += part.sum[a];
                acc.sumsq[a] += part.sumsq[a];
                acc.mn[a] = std::min(acc.mn[a], part.mn[a]);
                acc.mx[a] = std::max(acc.mx[a], part.mx[a]);
            }
            for (std::size_t p = 0; p < n_pairs; ++p) acc.cross[p] += part.cross[p];
        });

    CorrelationMatrix cm;
    cm.variable_names = names;
    cm.constant.resize(k);
    cm.values.assign(k, std::vector<double>(k, 0.0));
    const double dn = static_cast<double>(n);
    std::vector<double> var(k);
    for (std::size_t a = 0; a < k; ++a) {
        cm.constant[a] = m.mn[a] == m.mx[a];
        var[a] = dn * m.sumsq[a] - m.sum[a] * m.sum[a];
        cm.values[a][a] = 1.0;  // by convention, constants included
    }
    std::size_t p = 0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b, ++p) {
            double r = 0.0;
            if (!cm.constant[a] && !cm.constant[b]) {
                const double cov = dn * m.cross[p] - m.sum[a] * m.sum[b];
                r = cov / std::sqrt(var[a] * var[b]);
                r = std::clamp(r, -1.0, 1.0);
            }
            cm.values[a][b] = r;
            cm.values[b][a] = r;
        }
    }
    return cm;
}

std::string CorrelationMatrix::to_csv() const {
    std::string out = "variable";
    for (const auto& name : variable_names) out += "," + name;
    out += "\n";
    for (std::size_t a = 0; a < variable_names.size(); ++a) {
        out += variable_names[a];
        for (double v : values[a]) out += "," + detail::format_fixed(v, 6);
        out += "\n";
    }
    return out;
}

FeatureMatrix assemble_matrix(std::vector<SparseVector> text_vectors,
                              std::span<const std::string> term_names,
                              std::span<const BehavioralFeatures> behavioral,
                              const BehavioralScaler& scaler, std::span<const int> dataset_labels,
                              const std::optional<std::vector<std::uint32_t>>& selected) {
    const std::size_t n = text_vectors.size();
    if (behavioral.size() != n || dataset_labels.size() != n)
        throw DataError("assemble_matrix: input sequences must share one length");
    const auto text_dim = static_cast<std::uint32_t>(term_names.size());
    const std::uint32_t full_dim = text_dim + static_cast<std::uint32_t>(kBehavioralNames.size());

    FeatureMatrix fm;
    fm.column_names.reserve(full_dim);
    fm.column_names.assign(term_names.begin(), term_names.end());
    for (const char* b : kBehavioralNames) fm.column_names.emplace_back(b);

    if (selected.has_value()) {
        if (!std::is_sorted(selected->begin(), selected->end()) ||
            std::adjacent_find(selected->begin(), selected->end()) != selected->end())
            throw DataError("assemble_matrix: selection must be strictly ascending");
        if (!selected->empty() && selected->back() >= full_dim)
            throw DataError("assemble_matrix: selection index out of range");
        std::vector<std::string> names;
        names.reserve(selected->size());
        for (std::uint32_t c : *selected) names.push_back(std::move(fm.column_names[c]));
        fm.column_names = std::move(names);
    }

    fm.rows.resize(n);
    fm.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        SparseVector row = std::move(text_vectors[i]);
        if (row.dimension != text_dim)
            throw DataError("assemble_matrix: text vector dimension mismatch");
        row.dimension = full_dim;
        auto scaled = scaler.apply(behavioral[i]);
        for (std::size_t c = 0; c < scaled.size(); ++c)
            if (scaled[c] != 0.0)
                row.entries.push_back({text_dim + static_cast<std::uint32_t>(c), scaled[c]});

        if (selected.has_value()) {
            SparseVector proj;
            proj.dimension = static_cast<std::uint32_t>(selected->size());
            auto sel = selected->begin();
            std::uint32_t new_index = 0;
            for (const auto& e : row.entries) {
                while (sel != selected->end() && *sel < e.index) {
                    ++sel;
                    ++new_index;
                }
                if (sel == selected->end()) break;
                if (*sel == e.index) proj.entries.push_back({new_index, e.value});
            }
            row = std::move(proj);
        }
        fm.rows[i] = std::move(row);
        // The one and only label remap: dataset 0 = spam becomes internal
        // positive = 1, so downstream metrics treat spam as the positive class.
        fm.labels[i] = dataset_labels[i] == 0 ? 1 : 0;
    }
    return fm;
}

} // namespace spamdet
