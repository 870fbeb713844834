#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace twoport {

/// Worker cap: TPF_THREADS env var, else hardware concurrency.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("TPF_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Index-chunked parallel map. Each index is processed exactly once and the
/// caller indexes results by i, so the outcome is identical to the sequential
/// order regardless of the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace twoport
