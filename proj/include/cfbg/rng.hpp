// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace cfbg
{

// Tags separating the random streams of different model components within one trial.
enum class StreamTag : std::uint64_t
{
    Detection = 1,
    Moments = 2,
    Channel = 3,
    Noise = 4,
    Pilot = 5,
    Attack = 6,
    Geometry = 7,
    Codebook = 8,
};

std::uint64_t mix64(std::uint64_t x);

// Counter-based generator: the i-th output is a keyed hash of i, so a stream is fully
// determined by (seed, trial, tag) regardless of which thread evaluates it.
class Stream
{
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t trial, StreamTag tag);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    // uniform on (0, 1)
    double uniform();
    // uniform on [0, n)
    std::uint64_t below(std::uint64_t n);
    double normal();
    // circularly-symmetric complex Gaussian with E|z|^2 = variance
    std::complex<double> cnormal(double variance = 1.0);

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Throws std::out_of_range when trials [first, first + count) does not fit in 64-bit indices.
void check_trial_range(std::uint64_t first, std::uint64_t count);

} // namespace cfbg
