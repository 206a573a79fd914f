#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mcldp {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware count)
// using a static block partition. Callers must make fn(i) independent of
// execution order; all determinism in this project comes from per-index
// random streams, not from scheduling.
template <typename Fn>
void parallel_for(std::size_t n, uint32_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = static_cast<uint32_t>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (uint32_t t = 0; t < threads; ++t) {
        std::size_t begin = n * t / threads;
        std::size_t end = n * (t + 1) / threads;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mcldp
