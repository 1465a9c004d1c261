#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fedflip {

// Worker cap: FEDFLIP_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
inline int worker_threads() {
    if (const char* env = std::getenv("FEDFLIP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// processed exactly once; callers must make fn(i) independent of execution
// order so results match the serial schedule bit for bit.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t n_workers = std::min<std::size_t>(threads, count);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += n_workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fedflip
