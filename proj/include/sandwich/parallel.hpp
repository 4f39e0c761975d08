#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sandwich {

/// Runs `task(i)` for i in [0, count) on `workers` threads. Results must be written
/// by index; the schedule never influences what a task computes. The first exception
/// thrown by any task is rethrown on the calling thread after all workers join.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
    if (count == 0) return;
    workers = std::clamp<std::size_t>(workers, 1, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Map over indices, collecting results in index order.
template <class Result, class Task>
std::vector<Result> parallel_map(std::size_t count, std::size_t workers, Task&& task) {
    std::vector<Result> out(count);
    parallel_for(count, workers, [&](std::size_t i) { out[i] = task(i); });
    return out;
}

inline std::size_t default_workers() {
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace sandwich
