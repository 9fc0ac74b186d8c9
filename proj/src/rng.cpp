// SPDX-License-Identifier: Apache-2.0
#include "cfbg/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfbg
{

std::uint64_t mix64(std::uint64_t x)
{
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

Stream::Stream(std::uint64_t seed, std::uint64_t trial, StreamTag tag)
{
    std::uint64_t k = mix64(seed + 0x9E3779B97F4A7C15ull);
    k = mix64(k ^ (trial * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
    k = mix64(k ^ (static_cast<std::uint64_t>(tag) * 0xABC98388FB8FAC03ull));
    key_ = k;
}

Stream::result_type Stream::operator()()
{
    const std::uint64_t c = counter_++;
    return mix64(key_ ^ mix64(c * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull));
}

double Stream::uniform()
{
    // 53 random bits, shifted off zero
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Stream::below(std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("Stream::below: empty range");
    // rejection keeps the draw exactly uniform
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x >= limit);
    return x % n;
}

double Stream::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::complex<double> Stream::cnormal(double variance)
{
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

void check_trial_range(std::uint64_t first, std::uint64_t count)
{
    if (count > 0 && first > std::numeric_limits<std::uint64_t>::max() - (count - 1))
        throw std::out_of_range("trial index range exceeds 2^64");
}

} // namespace cfbg
