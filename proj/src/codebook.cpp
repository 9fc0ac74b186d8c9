// SPDX-License-Identifier: Apache-2.0
#include "cfbg/codebook.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cfbg
{

CfbgCodebook CfbgCodebook::build(int q, int k, std::uint64_t materialize_limit)
{
    ZfdCode zfd = mds_to_zfd(build_mds_code(q, k));
    return from_codewords(q, k, std::move(zfd.codewords), materialize_limit);
}

CfbgCodebook CfbgCodebook::from_codewords(int q, int k, std::vector<BinaryWord> codewords,
                                          std::uint64_t materialize_limit)
{
    if (q < 2 || k < 2)
        throw std::invalid_argument("CfbgCodebook: invalid q or k");
    CfbgCodebook book;
    book.q_ = q;
    book.k_ = k;
    book.n_ = 3 * k - 2;
    book.B_ = book.n_ * q;
    for (const auto &w : codewords) {
        if (w.size() != static_cast<std::size_t>(book.B_))
            throw std::invalid_argument("CfbgCodebook: codeword length differs from n*q");
        if (w.weight() != static_cast<std::size_t>(book.n_))
            throw std::invalid_argument("CfbgCodebook: codeword weight differs from n");
        for (int g = 0; g < book.n_; ++g) {
            int ones = 0;
            for (int s = 0; s < q; ++s)
                ones += w.test(static_cast<std::size_t>(g) * q + s);
            if (ones != 1)
                throw std::invalid_argument("CfbgCodebook: codeword group is not one-hot");
        }
    }
    if (codewords.size() < 2)
        throw std::invalid_argument("CfbgCodebook: need at least two codewords");
    book.all_ = std::move(codewords);
    book.half_ = book.all_.size() / 2;
    book.index_sums(materialize_limit);
    return book;
}

void CfbgCodebook::index_sums(std::uint64_t materialize_limit)
{
    const std::size_t c = full_size();
    const long double pairs = static_cast<long double>(c) * (c - 1) / 2;
    const long double triples = pairs * (c - 2) / 3;
    g0_.clear();
    g1_.clear();
    g2_.clear();
    materialized_ = pairs + triples <= static_cast<long double>(materialize_limit);
    if (!materialized_)
        return;

    auto put = [](Map &m, const BinaryWord &w, Constituents c) {
        if (!m.emplace(w, c).second)
            throw std::invalid_argument("CfbgCodebook: superposition sums collide; not a ZFD code");
    };
    g0_.reserve(c);
    g1_.reserve(static_cast<std::size_t>(pairs));
    g2_.reserve(static_cast<std::size_t>(triples));
    for (std::uint32_t a = 0; a < c; ++a) {
        put(g0_, all_[a], Constituents{{a, 0, 0}, 1});
        for (std::uint32_t b = a + 1; b < c; ++b) {
            const BinaryWord ab = all_[a] | all_[b];
            put(g1_, ab, Constituents{{a, b, 0}, 2});
            for (std::uint32_t d = b + 1; d < c; ++d)
                put(g2_, ab | all_[d], Constituents{{a, b, d}, 3});
        }
    }
}

const BinaryWord &CfbgCodebook::codeword(std::size_t index) const
{
    if (index >= all_.size())
        throw std::out_of_range("CfbgCodebook: codeword index out of range");
    return all_[index];
}

std::uint32_t CfbgCodebook::half_index(UserHalf half, std::size_t i) const
{
    if (i >= half_)
        throw std::out_of_range("CfbgCodebook: index outside the user half");
    return static_cast<std::uint32_t>(half == UserHalf::Bob ? i : half_ + i);
}

UserHalf CfbgCodebook::owner(std::uint32_t index) const
{
    if (index >= usable_size())
        throw std::out_of_range("CfbgCodebook: index outside the usable codebook");
    return index < half_ ? UserHalf::Bob : UserHalf::Charlie;
}

std::size_t CfbgCodebook::g1_size() const
{
    const std::size_t c = full_size();
    return c * (c - 1) / 2;
}

std::size_t CfbgCodebook::g2_size() const
{
    const std::size_t c = full_size();
    return c * (c - 1) * (c - 2) / 6;
}

std::optional<Constituents> CfbgCodebook::decompose(const BinaryWord &pattern) const
{
    if (pattern.size() != static_cast<std::size_t>(B_))
        throw std::invalid_argument("CfbgCodebook::decompose: pattern length differs from B");
    if (!materialized_)
        return decompose_by_scan(pattern);
    const Map *maps[] = {&g0_, &g1_, &g2_};
    for (const Map *m : maps) {
        auto it = m->find(pattern);
        if (it != m->end())
            return it->second;
    }
    return std::nullopt;
}

std::optional<Constituents> CfbgCodebook::decompose_by_scan(const BinaryWord &pattern) const
{
    if (pattern.size() != static_cast<std::size_t>(B_))
        throw std::invalid_argument("CfbgCodebook::decompose: pattern length differs from B");
    Constituents out;
    BinaryWord acc(pattern.size());
    for (std::uint32_t i = 0; i < full_size(); ++i) {
        if (!pattern.includes(all_[i]))
            continue;
        if (out.count == 3)
            return std::nullopt;
        out.index[out.count++] = i;
        acc |= all_[i];
    }
    if (out.count == 0 || !(acc == pattern))
        return std::nullopt;
    return out;
}

void CfbgCodebook::save(std::ostream &os) const
{
    os << "cfbg " << q_ << ' ' << k_ << ' ' << n_ << ' ' << B_ << ' ' << all_.size() << '\n';
    for (const auto &w : all_)
        os << w.to_string() << '\n';
}

CfbgCodebook CfbgCodebook::load(std::istream &is, std::uint64_t materialize_limit)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("CfbgCodebook::load: empty input");
    std::istringstream header(line);
    std::string tag;
    int q = 0, k = 0, n = 0, B = 0;
    std::size_t c = 0;
    if (!(header >> tag >> q >> k >> n >> B >> c) || tag != "cfbg")
        throw std::invalid_argument("CfbgCodebook::load: malformed header");
    if (n != 3 * k - 2 || B != n * q)
        throw std::invalid_argument("CfbgCodebook::load: header parameters are inconsistent");
    std::vector<BinaryWord> words;
    words.reserve(c);
    while (words.size() < c && std::getline(is, line)) {
        if (line.empty())
            continue;
        words.push_back(BinaryWord::from_string(line));
    }
    if (words.size() != c)
        throw std::invalid_argument("CfbgCodebook::load: expected " + std::to_string(c) + " codewords");
    return from_codewords(q, k, std::move(words), materialize_limit);
}

} // namespace cfbg
