#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace isoguard {

inline int default_thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [begin, end) across up to `threads` workers.
// Work items must be independent; results may not depend on scheduling.
template <typename Fn>
void parallel_for(size_t begin, size_t end, int threads, Fn&& fn) {
    const size_t total = end > begin ? end - begin : 0;
    if (total == 0) return;
    size_t workers = threads < 1 ? 1 : static_cast<size_t>(threads);
    workers = std::min(workers, total);
    if (workers == 1) {
        for (size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next(begin);
    std::exception_ptr first_error;
    std::atomic<bool> failed(false);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= end || failed.load(std::memory_order_relaxed)) break;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace isoguard
