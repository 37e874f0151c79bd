#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sdde {

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n) across `threads` workers in contiguous blocks.
/// Each index writes only its own preallocated slot, so results are identical
/// for any thread count; the first exception is rethrown after joining.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
    threads = resolve_thread_count(threads);
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    const long workers = std::min<long>(threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const long block = (n + workers - 1) / workers;
    for (long w = 0; w < workers; ++w) {
        const long lo = w * block;
        const long hi = std::min(n, lo + block);
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (long i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace sdde
