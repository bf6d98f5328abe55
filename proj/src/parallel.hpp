#ifndef MACEC_SRC_PARALLEL_HPP
#define MACEC_SRC_PARALLEL_HPP

#include <cstdint>
#include <thread>
#include <vector>

namespace macec::detail {

/// Runs fn(0..n-1) across hardware threads with a strided split.
/// Callers must make iterations independent and write results by
/// index; the partitioning then has no effect on the outcome.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::int64_t workers =
        std::min<std::int64_t>(n, hw == 0 ? 1 : static_cast<std::int64_t>(hw));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::int64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace macec::detail

#endif
