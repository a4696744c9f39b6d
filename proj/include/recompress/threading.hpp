#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace recompress {

/// Resolve a worker count. RECOMPRESS_JOBS overrides the --jobs flag; the
/// hardware thread count is the fallback.
inline int resolve_jobs(int requested) {
    if (const char* env = std::getenv("RECOMPRESS_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(0..n-1) on a bounded pool. Callers index into pre-sized output
/// slots, so parallel execution cannot reorder results. The first exception
/// is rethrown on the calling thread.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    jobs = resolve_jobs(jobs);
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(jobs, n);
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    if (error) std::rethrow_exception(error);
}

} // namespace recompress
