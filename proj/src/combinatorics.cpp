// SPDX-License-Identifier: Apache-2.0
#include "cfbg/combinatorics.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace cfbg
{

BinaryWord::BinaryWord(std::size_t length) : len_(length), bits_((length + 63) / 64, 0) {}

BinaryWord BinaryWord::from_string(std::string_view bits)
{
    BinaryWord w(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1')
            w.set(i);
        else if (bits[i] != '0')
            throw std::invalid_argument("BinaryWord::from_string: expected only '0' and '1'");
    }
    return w;
}

bool BinaryWord::test(std::size_t i) const
{
    if (i >= len_)
        throw std::out_of_range("BinaryWord::test: index out of range");
    return (bits_[i / 64] >> (i % 64)) & 1u;
}

void BinaryWord::set(std::size_t i, bool value)
{
    if (i >= len_)
        throw std::out_of_range("BinaryWord::set: index out of range");
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (value)
        bits_[i / 64] |= mask;
    else
        bits_[i / 64] &= ~mask;
}

std::size_t BinaryWord::weight() const
{
    std::size_t w = 0;
    for (auto b : bits_)
        w += static_cast<std::size_t>(std::popcount(b));
    return w;
}

bool BinaryWord::all() const { return weight() == len_; }

bool BinaryWord::none() const
{
    return std::all_of(bits_.begin(), bits_.end(), [](std::uint64_t b) { return b == 0; });
}

void BinaryWord::check_same_length(const BinaryWord &other) const
{
    if (other.len_ != len_)
        throw std::invalid_argument("BinaryWord: length mismatch");
}

bool BinaryWord::includes(const BinaryWord &other) const
{
    check_same_length(other);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if ((other.bits_[i] & ~bits_[i]) != 0)
            return false;
    return true;
}

BinaryWord &BinaryWord::operator|=(const BinaryWord &other)
{
    check_same_length(other);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        bits_[i] |= other.bits_[i];
    return *this;
}

std::string BinaryWord::to_string() const
{
    std::string s(len_, '0');
    for (std::size_t i = 0; i < len_; ++i)
        if (test(i))
            s[i] = '1';
    return s;
}

std::size_t BinaryWord::hash() const
{
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ len_;
    for (auto b : bits_) {
        h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h *= 0xBF58476D1CE4E5B9ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
}

BinaryWord sp_sum(const std::vector<BinaryWord> &words)
{
    if (words.empty())
        throw std::invalid_argument("sp_sum: no operands");
    BinaryWord out = words.front();
    for (std::size_t i = 1; i < words.size(); ++i)
        out |= words[i];
    return out;
}

Digits asp_sum(const std::vector<BinaryWord> &words)
{
    if (words.empty())
        throw std::invalid_argument("asp_sum: no operands");
    const std::size_t len = words.front().size();
    Digits out(len, 0);
    for (const auto &w : words) {
        if (w.size() != len)
            throw std::invalid_argument("asp_sum: length mismatch");
        for (std::size_t i = 0; i < len; ++i)
            out[i] = static_cast<std::uint8_t>(out[i] + (w.test(i) ? 1 : 0));
    }
    return out;
}

BinaryWord support(const Digits &digits)
{
    BinaryWord w(digits.size());
    for (std::size_t i = 0; i < digits.size(); ++i)
        if (digits[i] > 0)
            w.set(i);
    return w;
}

bool is_prime(int q)
{
    if (q < 2)
        return false;
    for (int d = 2; d * d <= q; ++d)
        if (q % d == 0)
            return false;
    return true;
}

namespace
{

int mod(long long a, int q)
{
    long long r = a % q;
    return static_cast<int>(r < 0 ? r + q : r);
}

int inverse_mod(int a, int q)
{
    // Fermat: a^(q-2)
    long long result = 1, base = mod(a, q);
    for (int e = q - 2; e > 0; e >>= 1) {
        if (e & 1)
            result = result * base % q;
        base = base * base % q;
    }
    return static_cast<int>(result);
}

} // namespace

MdsCode build_mds_code(int q, int k)
{
    if (!is_prime(q))
        throw std::invalid_argument("build_mds_code: q must be prime");
    if (k < 2)
        throw std::invalid_argument("build_mds_code: k must be at least 2");
    if (3 * k > q + 3)
        throw std::invalid_argument("build_mds_code: k exceeds (q+3)/3");
    const int n = 3 * k - 2;
    if (n > q + 1)
        throw std::invalid_argument("build_mds_code: n = 3k-2 exceeds q+1");
    if (q < 3 * (k - 1))
        throw std::invalid_argument("build_mds_code: q below 3(k-1)");

    MdsCode code;
    code.q = q;
    code.k = k;
    code.n = n;
    code.r = n - k;
    code.d = n - k + 1;

    // Lagrange basis over the message points 0..k-1, evaluated at each parity point.
    // Point q stands for infinity and reads off the leading coefficient.
    std::vector<std::vector<int>> gen(static_cast<std::size_t>(code.r), std::vector<int>(k, 0));
    for (int row = 0; row < code.r; ++row) {
        const int p = k + row;
        for (int j = 0; j < k; ++j) {
            long long num = 1, den = 1;
            for (int i = 0; i < k; ++i) {
                if (i == j)
                    continue;
                if (p < q)
                    num = num * mod(p - i, q) % q;
                den = den * mod(j - i, q) % q;
            }
            gen[row][j] = static_cast<int>(num * inverse_mod(static_cast<int>(den), q) % q);
        }
    }

    long long count = 1;
    for (int i = 0; i < k; ++i)
        count *= q;
    code.codewords.reserve(static_cast<std::size_t>(count));
    std::vector<int> msg(k, 0);
    for (long long idx = 0; idx < count; ++idx) {
        long long rem = idx;
        for (int j = k - 1; j >= 0; --j) {
            msg[j] = static_cast<int>(rem % q);
            rem /= q;
        }
        std::vector<int> cw(msg);
        cw.resize(n);
        for (int row = 0; row < code.r; ++row) {
            long long acc = 0;
            for (int j = 0; j < k; ++j)
                acc += static_cast<long long>(gen[row][j]) * msg[j];
            cw[k + row] = mod(acc, q);
        }
        code.codewords.push_back(std::move(cw));
    }
    return code;
}

int hamming_distance(const std::vector<int> &a, const std::vector<int> &b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("hamming_distance: length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d += a[i] != b[i];
    return d;
}

std::vector<LatinCube> latin_cubes_from_mds(const MdsCode &code)
{
    if (code.k != 3)
        throw std::invalid_argument("latin_cubes_from_mds: requires k = 3");
    const int q = code.q;
    std::vector<LatinCube> cubes(static_cast<std::size_t>(code.r));
    for (auto &c : cubes) {
        c.q = q;
        c.entries.assign(static_cast<std::size_t>(q) * q * q, 0);
    }
    for (const auto &cw : code.codewords) {
        const std::size_t cell = (static_cast<std::size_t>(cw[0]) * q + cw[1]) * q + cw[2];
        for (int l = 0; l < code.r; ++l)
            cubes[l].entries[cell] = cw[3 + l] + 1;
    }
    return cubes;
}

bool is_latin_cube(const LatinCube &cube)
{
    const int q = cube.q;
    if (q < 1 || cube.entries.size() != static_cast<std::size_t>(q) * q * q)
        return false;
    std::vector<char> seen(static_cast<std::size_t>(q) + 1);
    // every line parallel to each axis is a permutation of 1..q
    for (int axis = 0; axis < 3; ++axis) {
        for (int a = 0; a < q; ++a) {
            for (int b = 0; b < q; ++b) {
                std::fill(seen.begin(), seen.end(), 0);
                for (int t = 0; t < q; ++t) {
                    int v = axis == 0 ? cube.at(t, a, b) : axis == 1 ? cube.at(a, t, b) : cube.at(a, b, t);
                    if (v < 1 || v > q || seen[v])
                        return false;
                    seen[v] = 1;
                }
            }
        }
    }
    return true;
}

bool are_mutually_orthogonal(const std::vector<LatinCube> &cubes)
{
    if (cubes.empty())
        return true;
    const int q = cubes.front().q;
    const std::size_t cells = static_cast<std::size_t>(q) * q * q;
    std::unordered_set<std::uint64_t> tuples;
    tuples.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::uint64_t key = 0;
        for (const auto &c : cubes) {
            if (c.q != q || c.entries.size() != cells)
                throw std::invalid_argument("are_mutually_orthogonal: cube size mismatch");
            key = key * static_cast<std::uint64_t>(q + 1) + static_cast<std::uint64_t>(c.entries[cell]);
        }
        if (!tuples.insert(key).second)
            return false;
    }
    return true;
}

ZfdCode mds_to_zfd(const MdsCode &code)
{
    ZfdCode out;
    out.q = code.q;
    out.n = code.n;
    out.B = code.n * code.q;
    out.codewords.reserve(code.codewords.size());
    for (const auto &cw : code.codewords) {
        BinaryWord w(static_cast<std::size_t>(out.B));
        for (int i = 0; i < code.n; ++i)
            w.set(static_cast<std::size_t>(i) * code.q + cw[i]);
        out.codewords.push_back(std::move(w));
    }
    return out;
}

long double subsets_up_to(std::size_t c, int m)
{
    long double total = 0, term = 1;
    for (int t = 1; t <= m && static_cast<std::size_t>(t) <= c; ++t) {
        term = term * static_cast<long double>(c - t + 1) / t;
        total += term;
    }
    return total;
}

namespace
{

// Visit every subset of {0..c-1} with 1..m elements in increasing size, lexicographic within a size.
// The visitor returns false to stop.
void for_each_subset(std::size_t c, int m, const std::function<bool(const std::vector<std::size_t> &)> &visit)
{
    std::vector<std::size_t> idx;
    for (int t = 1; t <= m && static_cast<std::size_t>(t) <= c; ++t) {
        idx.resize(t);
        for (int i = 0; i < t; ++i)
            idx[i] = i;
        while (true) {
            if (!visit(idx))
                return;
            int i = t - 1;
            while (i >= 0 && idx[i] == c - t + i)
                --i;
            if (i < 0)
                break;
            ++idx[i];
            for (int j = i + 1; j < t; ++j)
                idx[j] = idx[j - 1] + 1;
        }
    }
}

void check_uniform_length(const std::vector<BinaryWord> &code)
{
    for (const auto &w : code)
        if (w.size() != code.front().size())
            throw std::invalid_argument("codeword length mismatch");
}

} // namespace

VerifyReport verify_zfd(const std::vector<BinaryWord> &code, int m, std::uint64_t budget)
{
    if (m < 1)
        throw std::invalid_argument("verify_zfd: order must be at least 1");
    VerifyReport rep;
    if (code.empty())
        return rep;
    check_uniform_length(code);

    const long double planned = subsets_up_to(code.size(), m) * static_cast<long double>(code.size());
    if (planned > static_cast<long double>(budget))
        throw ResourceError("verify_zfd: " + std::to_string(static_cast<double>(planned)) +
                            " checks exceed budget " + std::to_string(budget));

    std::unordered_map<BinaryWord, std::vector<std::size_t>, BinaryWordHash> seen;
    for_each_subset(code.size(), m, [&](const std::vector<std::size_t> &subset) {
        BinaryWord sum = code[subset[0]];
        for (std::size_t i = 1; i < subset.size(); ++i)
            sum |= code[subset[i]];
        // inclusion: no codeword outside the subset lies under the sum
        for (std::size_t j = 0; j < code.size(); ++j) {
            ++rep.checks;
            if (std::find(subset.begin(), subset.end(), j) != subset.end())
                continue;
            if (sum.includes(code[j])) {
                rep.ok = false;
                rep.reason = "sum of subset includes codeword " + std::to_string(j);
                rep.witness = subset;
                rep.witness.push_back(j);
                return false;
            }
        }
        // distinctness: different subsets give different sums
        auto [it, inserted] = seen.emplace(std::move(sum), subset);
        if (!inserted) {
            rep.ok = false;
            rep.reason = "two subsets share one superposition sum";
            rep.witness = it->second;
            rep.witness.insert(rep.witness.end(), subset.begin(), subset.end());
            return false;
        }
        return true;
    });
    return rep;
}

VerifyReport verify_bd_property(const std::vector<BinaryWord> &code, std::uint64_t budget)
{
    VerifyReport rep;
    if (code.empty())
        return rep;
    check_uniform_length(code);
    const std::size_t len = code.front().size();

    const long double planned = subsets_up_to(code.size(), 3) * static_cast<long double>(len + 1);
    if (planned > static_cast<long double>(budget))
        throw ResourceError("verify_bd_property: " + std::to_string(static_cast<double>(planned)) +
                            " checks exceed budget " + std::to_string(budget));

    std::unordered_set<BinaryWord, BinaryWordHash> sums;
    for_each_subset(code.size(), 3, [&](const std::vector<std::size_t> &subset) {
        BinaryWord sum = code[subset[0]];
        for (std::size_t i = 1; i < subset.size(); ++i)
            sum |= code[subset[i]];
        sums.insert(std::move(sum));
        ++rep.checks;
        return true;
    });

    for_each_subset(code.size(), 3, [&](const std::vector<std::size_t> &subset) {
        std::vector<BinaryWord> members;
        for (auto i : subset)
            members.push_back(code[i]);
        const Digits counts = asp_sum(members);
        const BinaryWord pattern = support(counts);
        for (std::size_t pos = 0; pos < len; ++pos) {
            if (counts[pos] != 1)
                continue;
            ++rep.checks;
            BinaryWord reduced = pattern;
            reduced.set(pos, false);
            if (sums.count(reduced)) {
                rep.ok = false;
                rep.reason = "clearing digit " + std::to_string(pos) + " leaves a decomposable pattern";
                rep.witness = subset;
                return false;
            }
        }
        return true;
    });
    return rep;
}

} // namespace cfbg
