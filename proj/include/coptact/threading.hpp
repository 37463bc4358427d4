#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace coptact {

/// Runs fn(begin, end, chunk_index) over fixed-size chunks of [0, n).
/// Chunk boundaries do not depend on the thread count, so per-chunk
/// partial results can be reduced in chunk order for bitwise-identical
/// output at any parallelism level. The first worker exception is
/// rethrown on the calling thread after the pool drains.
inline void parallel_chunks(int n, int chunk_size, int threads,
                            const std::function<void(int, int, int)>& fn) {
    if (n <= 0) return;
    const int n_chunks = (n + chunk_size - 1) / chunk_size;
    if (threads <= 1 || n_chunks == 1) {
        for (int c = 0; c < n_chunks; ++c) {
            fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks) break;
            try {
                fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(threads, n_chunks);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace coptact
