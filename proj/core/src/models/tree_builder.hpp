#pragma once

// Shared level-wise CART builder behind the tree, forest, and boosting
// trainers. Feature values must be non-negative: per-column lists hold only
// nonzero entries sorted by value, and the zero block is reconstructed
// implicitly from node totals.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "spamdet/features.hpp"
#include "spamdet/models.hpp"

namespace spamdet::detail {

struct ColumnEntry {
    double value = 0.0;
    std::uint32_t slot = 0;
};

using ColumnLists = std::vector<std::vector<ColumnEntry>>;

/// Per-column nonzero (value, row) lists sorted by value, built once per
/// training matrix and shared across trees. Throws TrainError on a negative
/// feature value.
struct ColumnIndex {
    std::uint32_t n_rows = 0;
    std::uint32_t n_columns = 0;
    ColumnLists columns;

    static ColumnIndex build(const FeatureMatrix& m);
};

/// Working copy for one tree, slots = rows.
ColumnLists identity_working_set(const ColumnIndex& index);

/// Working copy for one bootstrap resample. `counts[row]` is how many slots
/// duplicate that row; lists stay value-sorted because duplicated entries are
/// emitted in place. Returns the lists and fills `slot_row` (slot -> row).
ColumnLists bootstrap_working_set(const ColumnIndex& index,
                                  const std::vector<std::uint32_t>& counts,
                                  std::vector<std::uint32_t>& slot_row);

/// Gini impurity splits over 0/1 targets. Split quality is compared as an
/// exact rational so tie-breaks (lowest column, then smallest threshold) do
/// not depend on floating-point rounding.
struct GiniCriterion {
    using Target = std::uint8_t;
    using Sum = std::int64_t;

    struct NodeStat {
        std::int64_t n = 0;
        Sum s = 0;  // positive count

        void add(Target t) {
            ++n;
            s += t;
        }
        bool pure() const { return s == 0 || s == n; }
        double leaf_score() const { return static_cast<double>(s) / static_cast<double>(n); }
    };

    struct Quality {
        unsigned __int128 num = 0;
        unsigned __int128 den = 0;  // den == 0 marks "no quality yet"
    };

    // Minimizing weighted child Gini is maximizing
    // (posL^2 + negL^2)/nL + (posR^2 + negR^2)/nR, compared as num/den.
    static Quality quality(std::int64_t left_n, Sum left_s, const NodeStat& parent) {
        const std::int64_t right_n = parent.n - left_n;
        const Sum right_s = parent.s - left_s;
        const auto sq = [](std::int64_t p, std::int64_t n) {
            const std::int64_t q = n - p;
            return static_cast<unsigned __int128>(p) * static_cast<unsigned __int128>(p) +
                   static_cast<unsigned __int128>(q) * static_cast<unsigned __int128>(q);
        };
        Quality out;
        out.num = sq(left_s, left_n) * static_cast<unsigned __int128>(right_n) +
                  sq(right_s, right_n) * static_cast<unsigned __int128>(left_n);
        out.den = static_cast<unsigned __int128>(left_n) * static_cast<unsigned __int128>(right_n);
        return out;
    }

    static bool better(const Quality& a, const Quality& b) { return a.num * b.den > b.num * a.den; }
};

/// Variance-reduction splits over real targets, used for boosted regression
/// trees. Constant-target nodes are detected exactly via min == max.
struct VarianceCriterion {
    using Target = double;
    using Sum = double;

    struct NodeStat {
        std::int64_t n = 0;
        Sum s = 0.0;
        double mn = std::numeric_limits<double>::infinity();
        double mx = -std::numeric_limits<double>::infinity();

        void add(Target t) {
            ++n;
            s += t;
            mn = t < mn ? t : mn;
            mx = t > mx ? t : mx;
        }
        bool pure() const { return mn == mx; }
        double leaf_score() const { return s / static_cast<double>(n); }
    };

    struct Quality {
        double q = 0.0;
        bool valid = false;
    };

    // Minimizing child SSE is maximizing sumL^2/nL + sumR^2/nR.
    static Quality quality(std::int64_t left_n, Sum left_s, const NodeStat& parent) {
        const std::int64_t right_n = parent.n - left_n;
        const Sum right_s = parent.s - left_s;
        return {left_s * left_s / static_cast<double>(left_n) +
                    right_s * right_s / static_cast<double>(right_n),
                true};
    }

    static bool better(const Quality& a, const Quality& b) { return !b.valid || a.q > b.q; }
};

struct GrowSpec {
    std::uint32_t max_depth = 0;
    std::uint32_t min_samples_leaf = 1;
    std::uint32_t subset_size = 0;      // candidate columns per node; == n_columns: all
    std::mt19937_64* rng = nullptr;     // consulted only when subset_size < n_columns
};

/// Grows one tree. `columns` is consumed; `targets` has one entry per slot.
template <class Crit>
Tree grow_tree(std::uint32_t n_columns, std::uint32_t n_slots, ColumnLists columns,
               const std::vector<typename Crit::Target>& targets, const GrowSpec& spec,
               unsigned workers);

extern template Tree grow_tree<GiniCriterion>(std::uint32_t, std::uint32_t, ColumnLists,
                                              const std::vector<std::uint8_t>&, const GrowSpec&,
                                              unsigned);
extern template Tree grow_tree<VarianceCriterion>(std::uint32_t, std::uint32_t, ColumnLists,
                                                  const std::vector<double>&, const GrowSpec&,
                                                  unsigned);

/// 0/1 labels as tree targets; throws TrainError on any other label value.
std::vector<std::uint8_t> classification_targets(const FeatureMatrix& m);

} // namespace spamdet::detail
