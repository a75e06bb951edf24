#include "lowbridge/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lowbridge {

int worker_count() {
    static const int count = [] {
        if (const char* env = std::getenv("LOWBRIDGE_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return count;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    const int workers = worker_count();
    if (n <= 0) return;
    if (workers <= 1 || n < 4) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int used = static_cast<int>(std::min<std::int64_t>(workers, n));
    const std::int64_t chunk = (n + used - 1) / used;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(used));
    for (int t = 0; t < used; ++t) {
        const std::int64_t lo = t * chunk;
        const std::int64_t hi = std::min<std::int64_t>(lo + chunk, n);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace lowbridge
