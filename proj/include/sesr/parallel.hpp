#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace sesr {

// Worker count from SESR_THREADS (default 1).
inline int thread_count() {
    const char* env = std::getenv("SESR_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n >= 1 ? n : 1;
}

// Index-parallel loop; each index must write only its own outputs so results
// do not depend on the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = thread_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    const std::size_t used = std::min<std::size_t>(workers, n);
    for (std::size_t t = 0; t < used; ++t)
        threads.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += used) fn(i);
        });
    for (auto& th : threads) th.join();
}

}  // namespace sesr
