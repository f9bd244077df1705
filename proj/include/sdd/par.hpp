/// @file par.hpp
/// @brief Minimal ordered map-reduce over subdomain indices.

#ifndef SDD_PAR_HPP
#define SDD_PAR_HPP

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sdd {

/// Run fn(i) for i in [0, count). Results must be written to
/// per-index slots by the caller so reductions stay order-deterministic
/// regardless of thread count.
template <typename Fn>
void parallel_for(int count, int nthreads, Fn&& fn) {
    nthreads = std::max(1, std::min(nthreads, count));
    if (nthreads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mx;
    std::vector<int> next{0};
    std::mutex next_mx;
    auto worker = [&]() {
        for (;;) {
            int i;
            {
                std::lock_guard lk(next_mx);
                if (next[0] >= count) return;
                i = next[0]++;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(err_mx);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace sdd

#endif
