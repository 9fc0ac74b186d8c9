// SPDX-License-Identifier: Apache-2.0
#include "cfbg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cfbg
{

int resolve_threads(int requested)
{
    if (requested < 0)
        throw std::invalid_argument("thread count must be non-negative");
    if (requested == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
    return requested;
}

void run_chunks(std::uint64_t trials, int threads,
                const std::function<void(std::size_t, std::uint64_t, std::uint64_t)> &body)
{
    const std::size_t chunks = static_cast<std::size_t>((trials + kTrialChunk - 1) / kTrialChunk);
    const int workers = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::size_t>(chunks, 1))));

    auto run_one = [&](std::size_t c) {
        const std::uint64_t first = static_cast<std::uint64_t>(c) * kTrialChunk;
        const std::uint64_t end = std::min(trials, first + kTrialChunk);
        body(c, first, end);
    };

    if (workers == 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            run_one(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t c = next.fetch_add(1);
                if (c >= chunks)
                    return;
                try {
                    run_one(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(chunks);
                }
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace cfbg
