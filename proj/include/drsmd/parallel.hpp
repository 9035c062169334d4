#ifndef DRSMD_PARALLEL_HPP
#define DRSMD_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace drsmd {

inline int& thread_count_ref() {
    static int count = 1;
    return count;
}

inline void set_thread_count(int n) { thread_count_ref() = n < 1 ? 1 : n; }
inline int thread_count() { return thread_count_ref(); }

// Runs fn(block_index, begin, end) over fixed-size blocks of [0, n).
// The block partition depends only on block_size, never on the worker count,
// so per-block results can be combined in block order to give output that is
// identical for any thread count.
template <typename Fn>
void parallel_blocks(std::size_t n, std::size_t block_size, const Fn& fn) {
    if (n == 0) return;
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    const int workers = std::min<int>(thread_count(), static_cast<int>(n_blocks));
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr eptr = nullptr;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks || failed.load()) return;
                try {
                    fn(b, b * block_size, std::min(n, (b + 1) * block_size));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!eptr) eptr = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (eptr) std::rethrow_exception(eptr);
}

}  // namespace drsmd

#endif  // DRSMD_PARALLEL_HPP
