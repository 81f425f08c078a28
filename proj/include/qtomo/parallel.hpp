#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace qtomo {

// Hardware concurrency with a floor of 1.
inline int default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs body(i) for i in [0, count) on `threads` workers with a static
// contiguous partition. Which worker runs an index never affects what the
// body computes, so callers that write to index i of a preallocated buffer
// get results independent of the worker count. The first exception (lowest
// worker id) is rethrown after all workers join.
template <typename F>
void parallel_for(std::int64_t count, int threads, F&& body) {
    if (threads <= 0) threads = default_thread_count();
    if (count <= 0) return;
    if (threads == 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    if (static_cast<std::int64_t>(threads) > count) {
        threads = static_cast<int>(count);
    }

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        const std::int64_t begin = count * w / threads;
        const std::int64_t end = count * (w + 1) / threads;
        workers.emplace_back([&, w, begin, end] {
            try {
                for (std::int64_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace qtomo
