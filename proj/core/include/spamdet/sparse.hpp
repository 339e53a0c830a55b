#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace spamdet {

/// Sparse feature row: (index, value) entries with strictly increasing indices,
/// no stored zeros, all indices < dimension.
struct SparseVector {
    struct Entry {
        std::uint32_t index = 0;
        double value = 0.0;

        bool operator==(const Entry&) const = default;
    };

    std::uint32_t dimension = 0;
    std::vector<Entry> entries;

    /// Value at column `index`, 0.0 for unstored entries.
    double at(std::uint32_t index) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const Entry& e, std::uint32_t i) { return e.index < i; });
        return (it != entries.end() && it->index == index) ? it->value : 0.0;
    }

    double l2_norm() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * e.value;
        return std::sqrt(s);
    }

    /// Sorts entries by index, merges duplicates by addition, drops zeros.
    /// Call after unordered construction to restore the representation invariant.
    void normalize_layout() {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.index < b.index; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < entries.size();) {
            std::uint32_t idx = entries[i].index;
            double sum = 0.0;
            while (i < entries.size() && entries[i].index == idx) sum += entries[i++].value;
            if (sum != 0.0) entries[out++] = Entry{idx, sum};
        }
        entries.resize(out);
    }

    bool operator==(const SparseVector&) const = default;
};

inline double dot(const SparseVector& a, const std::vector<double>& dense) {
    double s = 0.0;
    for (const auto& e : a.entries) s += e.value * dense[e.index];
    return s;
}

} // namespace spamdet
