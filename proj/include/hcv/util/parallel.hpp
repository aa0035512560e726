#pragma once

// Index-parallel loop over [0, n). Results go into caller-owned slots, so the
// reduction order stays deterministic regardless of scheduling.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hcv {

/// Worker count: hardware concurrency, capped by HC_THREADS when set.
inline unsigned worker_count()
{
    unsigned n = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HC_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

template <class F>
void parallel_for(std::size_t n, F&& body, unsigned threads = 0)
{
    if (threads == 0) threads = worker_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    const std::size_t chunk = std::max<std::size_t>(1, n / (threads * 16));
    auto work = [&] {
        for (;;) {
            const std::size_t lo = next.fetch_add(chunk);
            if (lo >= n) return;
            const std::size_t hi = std::min(n, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace hcv
