// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_PARALLEL_HPP
#define PARLAB_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace parlab::num {

/// Run fn(i) for i in [0, n) on up to `jobs` threads. Results must be
/// written by index into caller-owned storage so the reduction order (and
/// therefore every output byte) is independent of the thread count.
template <typename Fn>
void parallel_for(int64_t n, int jobs, Fn&& fn) {
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = static_cast<int>(std::min<int64_t>(jobs, n));
    std::atomic<int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int64_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace parlab::num

#endif
