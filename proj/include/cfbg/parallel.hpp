// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace cfbg
{

// Trials are cut into chunks of fixed size independent of the worker count. Each chunk is
// reduced in trial order and chunks are merged in chunk order, so floating-point results do
// not depend on how many threads ran.
inline constexpr std::uint64_t kTrialChunk = 1024;

int resolve_threads(int requested);

// Calls body(chunk_index, first_trial, end_trial) for every chunk, spread over `threads` workers.
void run_chunks(std::uint64_t trials, int threads,
                const std::function<void(std::size_t, std::uint64_t, std::uint64_t)> &body);

// Runs per-trial work into chunk accumulators and merges them in order.
template <class Acc, class TrialFn>
Acc reduce_trials(std::uint64_t trials, int threads, TrialFn trial_fn)
{
    const std::size_t chunks = static_cast<std::size_t>((trials + kTrialChunk - 1) / kTrialChunk);
    std::vector<Acc> partial(chunks);
    run_chunks(trials, threads, [&](std::size_t c, std::uint64_t first, std::uint64_t end) {
        for (std::uint64_t t = first; t < end; ++t)
            trial_fn(t, partial[c]);
    });
    Acc total{};
    for (auto &p : partial)
        total.merge(p);
    return total;
}

} // namespace cfbg
