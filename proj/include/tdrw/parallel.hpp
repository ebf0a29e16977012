#pragma once
// Minimal deterministic parallel-for: work items are indexed, each worker owns
// a contiguous stripe decided before launch, results land in preallocated
// slots, so output never depends on thread count or scheduling.

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace tdrw {

// --threads flag value, else TDRW_THREADS, else hardware concurrency
inline int resolve_threads(int flag_value = 0) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("TDRW_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? (int)hw : 1;
}

template <class Work>
void parallel_for(int64_t n, int threads, Work&& work) {
    if (n <= 0) return;
    threads = (int)std::max<int64_t>(1, std::min<int64_t>(threads, n));
    if (threads == 1) {
        for (int64_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        int64_t lo = n * t / threads, hi = n * (t + 1) / threads;
        pool.emplace_back([lo, hi, &work] {
            for (int64_t i = lo; i < hi; ++i) work(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace tdrw
