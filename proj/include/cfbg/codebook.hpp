// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cfbg/combinatorics.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

namespace cfbg
{

enum class UserHalf
{
    Bob,
    Charlie
};

// Codeword indices whose SP sum equals a looked-up pattern.
struct Constituents
{
    std::array<std::uint32_t, 3> index{};
    std::uint8_t count = 0;

    std::vector<std::uint32_t> to_vector() const { return {index.begin(), index.begin() + count}; }
};

// Codebook built from the ZFD image of an MDS code. When the code has an odd number of codewords
// the last one belongs to neither user so that Bob and Charlie own halves of equal size. It stays
// in the sum sets because an attacker may still transmit it.
class CfbgCodebook
{
public:
    // Above this many pairs plus triples the sumset maps are not materialized and lookups scan
    // the codebook for included codewords instead.
    static constexpr std::uint64_t kDefaultMaterializeLimit = 4'000'000;

    static CfbgCodebook build(int q, int k, std::uint64_t materialize_limit = kDefaultMaterializeLimit);
    static CfbgCodebook from_codewords(int q, int k, std::vector<BinaryWord> codewords,
                                       std::uint64_t materialize_limit = kDefaultMaterializeLimit);

    int q() const { return q_; }
    int k() const { return k_; }
    int n() const { return n_; }
    int B() const { return B_; }
    std::size_t full_size() const { return all_.size(); }
    std::size_t usable_size() const { return 2 * half_; }
    std::size_t half_size() const { return half_; }

    const BinaryWord &codeword(std::size_t index) const;
    const std::vector<BinaryWord> &all_codewords() const { return all_; }

    // Index into the usable codebook of entry `i` of a user's half.
    std::uint32_t half_index(UserHalf half, std::size_t i) const;
    // Throws for the spare codeword outside both halves.
    UserHalf owner(std::uint32_t index) const;
    bool owned(std::uint32_t index) const { return index < usable_size(); }

    bool materialized() const { return materialized_; }
    std::size_t g1_size() const;
    std::size_t g2_size() const;

    // Looks up a pattern in the union of single codewords, pair sums and triple sums.
    std::optional<Constituents> decompose(const BinaryWord &pattern) const;

    // Same result via inclusion scan; used when maps are not materialized and as a cross-check.
    std::optional<Constituents> decompose_by_scan(const BinaryWord &pattern) const;

    void save(std::ostream &os) const;
    static CfbgCodebook load(std::istream &is, std::uint64_t materialize_limit = kDefaultMaterializeLimit);

private:
    void index_sums(std::uint64_t materialize_limit);

    int q_ = 0, k_ = 0, n_ = 0, B_ = 0;
    std::size_t half_ = 0;
    std::vector<BinaryWord> all_;
    bool materialized_ = false;
    using Map = std::unordered_map<BinaryWord, Constituents, BinaryWordHash>;
    Map g0_, g1_, g2_;
};

} // namespace cfbg
