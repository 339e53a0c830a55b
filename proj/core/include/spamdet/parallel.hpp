#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

namespace spamdet {

/// Fixed chunk length used by all parallel reductions. Chunk boundaries must not
/// depend on the worker count, otherwise floating-point merges would reorder and
/// results could drift between runs with different --workers values.
inline constexpr std::size_t kReduceChunk = 1024;

inline unsigned effective_workers(unsigned requested) {
    if (requested == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }
    return requested;
}

/// Runs fn(i) for i in [0, n). Work items must be independent; each writes only
/// its own output slot, so scheduling order cannot change the result. `grain` is
/// the number of consecutive items a worker claims at once; use a large grain for
/// cheap per-item work.
template <typename Fn>
void parallel_for_each(std::size_t n, unsigned workers, Fn&& fn, std::size_t grain = 1) {
    workers = effective_workers(workers);
    if (n == 0) return;
    if (grain == 0) grain = 1;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t n_blocks = (n + grain - 1) / grain;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) break;
            const std::size_t begin = b * grain;
            const std::size_t end = std::min(begin + grain, n);
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));
    pool.reserve(spawn);
    for (unsigned t = 1; t < spawn; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

/// Chunked reduction with a worker-count-independent merge order: the input is cut
/// into fixed-size chunks, each chunk is mapped to a partial result (in parallel),
/// and partials are combined sequentially in chunk index order. Identical output
/// for any worker count.
///
/// map:     partial(chunk_begin, chunk_end) -> T
/// combine: accumulate(T& into, T& partial), called in chunk order
template <typename T, typename Map, typename Combine>
T chunked_reduce(std::size_t n, unsigned workers, T init, Map&& map, Combine&& combine) {
    if (n == 0) return init;
    const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<T> partials(n_chunks);
    parallel_for_each(n_chunks, workers, [&](std::size_t c) {
        const std::size_t begin = c * kReduceChunk;
        const std::size_t end = std::min(begin + kReduceChunk, n);
        partials[c] = map(begin, end);
    });
    T acc = std::move(init);
    for (std::size_t c = 0; c < n_chunks; ++c) combine(acc, partials[c]);
    return acc;
}

} // namespace spamdet
