#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ruinlab {

// Worker-count control for Monte Carlo loops.  The result of any computation
// must not depend on this value: work is split into fixed-size blocks keyed
// by block index, and per-block results are merged in index order.
inline std::atomic<int>& detail_thread_limit() {
    static std::atomic<int> v{static_cast<int>(std::thread::hardware_concurrency())};
    return v;
}
inline int max_threads() { return std::max(1, detail_thread_limit().load()); }
inline void set_max_threads(int n) { detail_thread_limit().store(n < 1 ? 1 : n); }

inline constexpr std::size_t kMcBlockSize = 1 << 14;

// Evaluates fn(block) for block = 0..nblocks-1, possibly concurrently, and
// returns results ordered by block index.  fn must be safe to call from any
// thread and must derive randomness only from the block index.
template <class T, class Fn>
std::vector<T> run_blocks(std::size_t nblocks, Fn&& fn) {
    std::vector<T> out(nblocks);
    const int nthreads = std::min<std::size_t>(std::max(1, max_threads()), nblocks ? nblocks : 1);
    if (nthreads <= 1 || nblocks <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) out[b] = fn(b);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= nblocks || failed.load()) return;
            try {
                out[b] = fn(b);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
    return out;
}

inline void block_bounds(std::size_t n, std::size_t block, std::size_t* lo, std::size_t* hi) {
    *lo = block * kMcBlockSize;
    *hi = std::min(n, *lo + kMcBlockSize);
}

inline std::size_t block_count(std::size_t n) {
    return (n + kMcBlockSize - 1) / kMcBlockSize;
}

}  // namespace ruinlab
