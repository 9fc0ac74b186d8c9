// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfbg
{

// Thrown when an exhaustive check would exceed its work budget.
class ResourceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Fixed-length binary word packed into 64-bit blocks.
class BinaryWord
{
public:
    BinaryWord() = default;
    explicit BinaryWord(std::size_t length);

    static BinaryWord from_string(std::string_view bits);

    std::size_t size() const { return len_; }
    bool test(std::size_t i) const;
    void set(std::size_t i, bool value = true);
    std::size_t weight() const;
    bool all() const;
    bool none() const;

    // true when every 1 of `other` is also a 1 here
    bool includes(const BinaryWord &other) const;

    BinaryWord &operator|=(const BinaryWord &other);
    friend BinaryWord operator|(BinaryWord a, const BinaryWord &b) { return a |= b; }
    bool operator==(const BinaryWord &other) const = default;

    std::string to_string() const;
    std::size_t hash() const;
    const std::vector<std::uint64_t> &blocks() const { return bits_; }

private:
    void check_same_length(const BinaryWord &other) const;

    std::size_t len_ = 0;
    std::vector<std::uint64_t> bits_;
};

struct BinaryWordHash
{
    std::size_t operator()(const BinaryWord &w) const { return w.hash(); }
};

// Per-digit counts produced by arithmetic superposition.
using Digits = std::vector<std::uint8_t>;

// Boolean (SP) sum.
BinaryWord sp_sum(const std::vector<BinaryWord> &words);

// Arithmetic (ASP) sum.
Digits asp_sum(const std::vector<BinaryWord> &words);

// Indicator of the nonzero digits.
BinaryWord support(const Digits &digits);

struct MdsCode
{
    int q = 0;
    int k = 0;
    int n = 0;
    int r = 0;
    int d = 0;
    // q^k codewords, symbols in [0, q), first k coordinates systematic.
    std::vector<std::vector<int>> codewords;
};

bool is_prime(int q);

// Reed-Solomon style [n = 3k-2, k] code over GF(q) for q prime.
// Evaluation points are 0..q-1 in order, plus the point at infinity when n = q + 1.
MdsCode build_mds_code(int q, int k);

int hamming_distance(const std::vector<int> &a, const std::vector<int> &b);

struct LatinCube
{
    int q = 0;
    std::vector<int> entries; // q^3 entries in [1, q], index (i1*q + i2)*q + i3

    int at(int i1, int i2, int i3) const { return entries[(static_cast<std::size_t>(i1) * q + i2) * q + i3]; }
};

// One cube per parity coordinate of a k = 3 code, indexed by the three message symbols.
std::vector<LatinCube> latin_cubes_from_mds(const MdsCode &code);

bool is_latin_cube(const LatinCube &cube);

// Superimposing the cubes yields q^3 distinct value tuples.
bool are_mutually_orthogonal(const std::vector<LatinCube> &cubes);

struct ZfdCode
{
    int q = 0;
    int n = 0;
    int B = 0;
    std::vector<BinaryWord> codewords;
};

// Symbol s at coordinate i becomes a 1 at position i*q + s.
ZfdCode mds_to_zfd(const MdsCode &code);

struct VerifyReport
{
    bool ok = true;
    std::string reason;
    std::vector<std::size_t> witness; // offending subset (codeword indices)
    std::uint64_t checks = 0;
};

inline constexpr std::uint64_t kDefaultCheckBudget = 100'000'000;

// Exhaustive check of the two superposition principles for all subsets of at most m codewords.
VerifyReport verify_zfd(const std::vector<BinaryWord> &code, int m,
                        std::uint64_t budget = kDefaultCheckBudget);

// For every ASP sum of at most three codewords, clearing any single digit equal to 1 must give
// a Boolean pattern that is not the SP sum of any codeword subset of size at most three.
VerifyReport verify_bd_property(const std::vector<BinaryWord> &code,
                                std::uint64_t budget = kDefaultCheckBudget);

// Number of subsets of size 1..m drawn from c elements.
long double subsets_up_to(std::size_t c, int m);

} // namespace cfbg
