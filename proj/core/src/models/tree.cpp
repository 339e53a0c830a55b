#include "tree_builder.hpp"

#include <algorithm>
#include <cstring>

#include "spamdet/errors.hpp"
#include "spamdet/parallel.hpp"

namespace spamdet {

double Tree::predict(const SparseVector& row) const {
    const TreeNode* node = &nodes[0];
    while (node->column >= 0) {
        const double v = row.at(static_cast<std::uint32_t>(node->column));
        node = &nodes[v <= node->threshold ? node->left : node->right];
    }
    return node->score;
}

namespace detail {

ColumnIndex ColumnIndex::build(const FeatureMatrix& m) {
    ColumnIndex index;
    index.n_rows = static_cast<std::uint32_t>(m.n_rows());
    index.n_columns = m.dimension();
    index.columns.resize(index.n_columns);
    for (std::uint32_t i = 0; i < index.n_rows; ++i) {
        for (const auto& e : m.rows[i].entries) {
            if (e.value < 0.0) throw TrainError("tree training requires non-negative features");
            if (e.value == 0.0) continue;
            index.columns[e.index].push_back({e.value, i});
        }
    }
    for (auto& col : index.columns)
        std::stable_sort(col.begin(), col.end(), [](const ColumnEntry& a, const ColumnEntry& b) {
            return a.value < b.value;
        });
    return index;
}

ColumnLists identity_working_set(const ColumnIndex& index) { return index.columns; }

ColumnLists bootstrap_working_set(const ColumnIndex& index,
                                  const std::vector<std::uint32_t>& counts,
                                  std::vector<std::uint32_t>& slot_row) {
    std::vector<std::uint32_t> slot_base(index.n_rows, 0);
    std::uint32_t total = 0;
    for (std::uint32_t r = 0; r < index.n_rows; ++r) {
        slot_base[r] = total;
        total += counts[r];
    }
    slot_row.assign(total, 0);
    for (std::uint32_t r = 0; r < index.n_rows; ++r)
        for (std::uint32_t k = 0; k < counts[r]; ++k) slot_row[slot_base[r] + k] = r;

    ColumnLists lists(index.n_columns);
    for (std::uint32_t c = 0; c < index.n_columns; ++c) {
        const auto& src = index.columns[c];
        auto& dst = lists[c];
        std::size_t out_n = 0;
        for (const auto& e : src) out_n += counts[e.slot];
        dst.reserve(out_n);
        for (const auto& e : src)
            for (std::uint32_t k = 0; k < counts[e.slot]; ++k)
                dst.push_back({e.value, slot_base[e.slot] + k});
    }
    return lists;
}

namespace {

constexpr std::uint32_t kDiscard = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kColumnBlock = 64;

template <class Crit>
struct BestSplit {
    typename Crit::Quality quality{};
    std::int32_t column = -1;
    double threshold = 0.0;
};

} // namespace

template <class Crit>
Tree grow_tree(std::uint32_t n_columns, std::uint32_t n_slots, ColumnLists columns,
               const std::vector<typename Crit::Target>& targets, const GrowSpec& spec,
               unsigned workers) {
    using Stat = typename Crit::NodeStat;

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<std::uint32_t> node_of_slot(n_slots, 0);
    std::uint32_t level_first = 0;
    std::uint32_t level_count = 1;
    std::uint32_t depth = 0;
    const bool sample_columns = spec.subset_size < n_columns;
    const std::int64_t min_leaf = spec.min_samples_leaf;
    std::vector<std::uint64_t> colset((n_columns + 63) / 64);

    while (level_count > 0) {
        std::vector<Stat> stat(level_count);
        for (std::uint32_t s = 0; s < n_slots; ++s) {
            const std::uint32_t nid = node_of_slot[s];
            if (nid != kDiscard) stat[nid - level_first].add(targets[s]);
        }

        std::vector<char> splittable(level_count, 0);
        bool any_attempt = false;
        for (std::uint32_t l = 0; l < level_count; ++l) {
            if (depth < spec.max_depth && stat[l].n >= 2 * min_leaf && !stat[l].pure()) {
                splittable[l] = 1;
                any_attempt = true;
            }
        }

        // Column subsets are drawn for splittable nodes in id order, before any
        // parallel work, so the RNG stream never depends on scheduling.
        const std::uint32_t node_words = (level_count + 63) / 64;
        std::vector<std::uint64_t> wanted;
        if (sample_columns && any_attempt) {
            wanted.assign(static_cast<std::size_t>(n_columns) * node_words, 0);
            for (std::uint32_t l = 0; l < level_count; ++l) {
                if (!splittable[l]) continue;
                std::fill(colset.begin(), colset.end(), 0);
                // Floyd's sampling: m distinct columns in m draws.
                for (std::uint32_t j = n_columns - spec.subset_size; j < n_columns; ++j) {
                    auto t = static_cast<std::uint32_t>((*spec.rng)() % (j + 1));
                    if ((colset[t >> 6] >> (t & 63)) & 1) t = j;
                    colset[t >> 6] |= 1ull << (t & 63);
                    wanted[static_cast<std::size_t>(t) * node_words + (l >> 6)] |= 1ull
                                                                                  << (l & 63);
                }
            }
        }
        const auto is_wanted = [&](std::uint32_t c, std::uint32_t l) {
            if (!sample_columns) return true;
            return ((wanted[static_cast<std::size_t>(c) * node_words + (l >> 6)] >> (l & 63)) &
                    1) != 0;
        };

        // Best split per node, found over fixed column blocks in parallel and
        // merged in block order so ties resolve to the lowest column and then
        // the smallest threshold no matter the worker count.
        std::vector<BestSplit<Crit>> best(level_count);
        if (any_attempt) {
            const std::uint32_t n_blocks = (n_columns + kColumnBlock - 1) / kColumnBlock;
            std::vector<std::vector<BestSplit<Crit>>> block_best(n_blocks);
            parallel_for_each(n_blocks, workers, [&](std::size_t blk) {
                auto& local = block_best[blk];
                local.assign(level_count, {});
                const auto c_begin = static_cast<std::uint32_t>(blk) * kColumnBlock;
                const std::uint32_t c_end = std::min(n_columns, c_begin + kColumnBlock);
                for (std::uint32_t c = c_begin; c < c_end; ++c) {
                    const auto& list = columns[c];
                    std::size_t i = 0;
                    while (i < list.size()) {
                        const std::uint32_t l = node_of_slot[list[i].slot] - level_first;
                        std::size_t j = i;
                        std::int64_t nz_n = 0;
                        typename Crit::Sum nz_s{};
                        while (j < list.size() &&
                               node_of_slot[list[j].slot] - level_first == l) {
                            ++nz_n;
                            nz_s += targets[list[j].slot];
                            ++j;
                        }
                        if (splittable[l] && is_wanted(c, l)) {
                            const Stat& parent = stat[l];
                            auto& b = local[l];
                            std::int64_t left_n = 0;
                            typename Crit::Sum left_s{};
                            double prev_value = 0.0;
                            if (parent.n > nz_n) {  // implicit zero block leads
                                left_n = parent.n - nz_n;
                                left_s = parent.s - nz_s;
                            }
                            std::size_t k = i;
                            while (k < j) {
                                const double v = list[k].value;
                                if (left_n >= min_leaf && parent.n - left_n >= min_leaf &&
                                    left_n > 0) {
                                    const auto q = Crit::quality(left_n, left_s, parent);
                                    if (b.column < 0 || Crit::better(q, b.quality))
                                        b = {q, static_cast<std::int32_t>(c),
                                             (prev_value + v) / 2.0};
                                }
                                while (k < j && list[k].value == v) {
                                    ++left_n;
                                    left_s += targets[list[k].slot];
                                    ++k;
                                }
                                prev_value = v;
                            }
                        }
                        i = j;
                    }
                }
            });
            for (std::uint32_t blk = 0; blk < n_blocks; ++blk)
                for (std::uint32_t l = 0; l < level_count; ++l) {
                    const auto& bb = block_best[blk][l];
                    if (bb.column >= 0 &&
                        (best[l].column < 0 || Crit::better(bb.quality, best[l].quality)))
                        best[l] = bb;
                }
        }

        const auto next_first = static_cast<std::uint32_t>(tree.nodes.size());
        std::vector<std::uint32_t> left_id(level_count, kDiscard);
        std::uint32_t n_children = 0;
        for (std::uint32_t l = 0; l < level_count; ++l) {
            if (splittable[l] && best[l].column >= 0) {
                left_id[l] = next_first + n_children;
                n_children += 2;
            }
        }
        tree.nodes.resize(tree.nodes.size() + n_children);
        for (std::uint32_t l = 0; l < level_count; ++l) {
            TreeNode& node = tree.nodes[level_first + l];
            if (left_id[l] == kDiscard) {
                node.column = -1;
                node.score = stat[l].leaf_score();
            } else {
                node.column = best[l].column;
                node.threshold = best[l].threshold;
                node.left = left_id[l];
                node.right = left_id[l] + 1;
            }
        }
        if (n_children == 0) break;

        // Slots default to the left child; entries above the chosen threshold
        // flip right. Zeros never appear in a column list and every candidate
        // threshold is positive, so implicit zeros stay left.
        std::vector<std::uint64_t> right_bits((static_cast<std::size_t>(n_slots) + 63) / 64, 0);
        std::vector<char> col_chosen(n_columns, 0);
        for (std::uint32_t l = 0; l < level_count; ++l)
            if (left_id[l] != kDiscard) col_chosen[best[l].column] = 1;
        for (std::uint32_t c = 0; c < n_columns; ++c) {
            if (!col_chosen[c]) continue;
            for (const auto& e : columns[c]) {
                const std::uint32_t l = node_of_slot[e.slot] - level_first;
                if (left_id[l] != kDiscard && best[l].column == static_cast<std::int32_t>(c) &&
                    e.value > best[l].threshold)
                    right_bits[e.slot >> 6] |= 1ull << (e.slot & 63);
            }
        }
        for (std::uint32_t s = 0; s < n_slots; ++s) {
            const std::uint32_t nid = node_of_slot[s];
            if (nid == kDiscard) continue;
            const std::uint32_t l = nid - level_first;
            node_of_slot[s] = left_id[l] == kDiscard
                                  ? kDiscard
                                  : left_id[l] + ((right_bits[s >> 6] >> (s & 63)) & 1);
        }

        // Counting sort keeps each column list grouped by node and value-sorted
        // within groups; entries of finalized leaves drop out.
        parallel_for_each(
            n_columns, workers,
            [&](std::size_t c) {
                auto& list = columns[c];
                if (list.empty()) return;
                std::vector<std::uint32_t> offset(n_children + 1, 0);
                for (const auto& e : list) {
                    const std::uint32_t nid = node_of_slot[e.slot];
                    if (nid != kDiscard) ++offset[nid - next_first + 1];
                }
                for (std::uint32_t b = 0; b < n_children; ++b) offset[b + 1] += offset[b];
                std::vector<ColumnEntry> out(offset[n_children]);
                for (const auto& e : list) {
                    const std::uint32_t nid = node_of_slot[e.slot];
                    if (nid != kDiscard) out[offset[nid - next_first]++] = e;
                }
                list = std::move(out);
            },
            8);

        level_first = next_first;
        level_count = n_children;
        ++depth;
    }
    return tree;
}

template Tree grow_tree<GiniCriterion>(std::uint32_t, std::uint32_t, ColumnLists,
                                       const std::vector<std::uint8_t>&, const GrowSpec&,
                                       unsigned);
template Tree grow_tree<VarianceCriterion>(std::uint32_t, std::uint32_t, ColumnLists,
                                           const std::vector<double>&, const GrowSpec&, unsigned);

std::vector<std::uint8_t> classification_targets(const FeatureMatrix& m) {
    std::vector<std::uint8_t> out(m.n_rows());
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        if (m.labels[i] != 0 && m.labels[i] != 1)
            throw TrainError("tree training requires 0/1 labels");
        out[i] = static_cast<std::uint8_t>(m.labels[i]);
    }
    return out;
}

} // namespace detail

TrainedModel train_decision_tree(const FeatureMatrix& matrix, const TrainConfig& config,
                                 unsigned workers) {
    if (matrix.n_rows() == 0) throw TrainError("training requires a non-empty matrix");
    if (config.min_samples_leaf < 1) throw TrainError("min_samples_leaf must be at least 1");
    const auto index = detail::ColumnIndex::build(matrix);
    const auto targets = detail::classification_targets(matrix);
    detail::GrowSpec spec{config.max_depth, config.min_samples_leaf, index.n_columns, nullptr};
    TrainedModel out;
    out.model = detail::grow_tree<detail::GiniCriterion>(index.n_columns, index.n_rows,
                                                         detail::identity_working_set(index),
                                                         targets, spec, workers);
    out.dimension = matrix.dimension();
    return out;
}

} // namespace spamdet
