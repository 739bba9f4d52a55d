#ifndef WLCB_MATH_PARALLEL_HPP
#define WLCB_MATH_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace wlcb {

// Thread cap: WELFARE_LCB_THREADS if set, otherwise hardware default.
inline int thread_count() {
    if (const char* env = std::getenv("WELFARE_LCB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Each index writes only to its own pre-allocated
// slot, so results are identical to a serial loop regardless of the thread
// count. The first exception thrown by any task is rethrown on the caller.
inline void parallel_for(long n, const std::function<void(long)>& fn) {
    const int threads = std::min<long>(thread_count(), std::max(n, 1L));
    if (threads <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (long i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Splits [0, n) into one contiguous chunk per thread and runs
// fn(begin, end) on each. Lets workers keep per-chunk scratch state while
// the output stays partition-independent.
inline void parallel_chunked(long n, const std::function<void(long, long)>& fn) {
    const int threads = static_cast<int>(std::min<long>(thread_count(), std::max(n, 1L)));
    if (threads <= 1 || n <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    const long chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const long begin = t * chunk;
        const long end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end]() {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace wlcb

#endif
