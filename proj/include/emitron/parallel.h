#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace emitron {

// Worker count from EMITRON_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

// Runs body(i) for i in [0, count) on up to `threads` workers using static
// contiguous chunks. Results must be written to per-index slots; any
// reduction happens afterwards in a fixed order, so output never depends on
// scheduling. The first exception thrown by a worker is rethrown.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    const std::size_t workers = std::min<std::size_t>(threads, count);
    const std::size_t chunk   = (count + workers - 1) / workers;

    std::exception_ptr firstError;
    std::mutex errorMutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end   = std::min(count, begin + chunk);
        pool.emplace_back([&, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                std::scoped_lock lock(errorMutex);
                if (!firstError) {
                    firstError = std::current_exception();
                }
            }
        });
    }
    pool.clear();

    if (firstError) {
        std::rethrow_exception(firstError);
    }
}

}
