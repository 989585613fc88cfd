#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace metadesign {

/// Worker count used by batch operations (homogenization maps, edge tables).
/// Defaults to the hardware concurrency.
unsigned worker_threads();
void set_worker_threads(unsigned n);

/// Runs fn(i) for i in [0, n). Results must be written to index-addressed
/// slots so the outcome does not depend on scheduling. The first exception
/// thrown by any task is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = worker_threads()) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(count - 1);
    for (unsigned t = 1; t < count; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace metadesign
