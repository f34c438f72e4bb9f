#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tsvc {

inline int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(begin, end) over a partition of [0, n_tasks) on n_threads
// threads. Each chunk is contiguous, so a caller can keep per-chunk scratch
// state. Results must be written by task index; the partition is a pure
// function of (n_tasks, n_threads), so output never depends on scheduling.
inline void parallel_chunks(int n_tasks, int n_threads,
                            const std::function<void(int, int)>& body) {
    if (n_tasks <= 0) return;
    n_threads = std::max(1, std::min(n_threads, n_tasks));
    if (n_threads == 1) {
        body(0, n_tasks);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));
    const int base = n_tasks / n_threads;
    const int extra = n_tasks % n_threads;
    int begin = 0;
    for (int t = 0; t < n_threads; ++t) {
        const int len = base + (t < extra ? 1 : 0);
        const int end = begin + len;
        workers.emplace_back([&body, &errors, t, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void parallel_for(int n_tasks, int n_threads, const std::function<void(int)>& body) {
    parallel_chunks(n_tasks, n_threads, [&body](int begin, int end) {
        for (int i = begin; i < end; ++i) body(i);
    });
}

}  // namespace tsvc
