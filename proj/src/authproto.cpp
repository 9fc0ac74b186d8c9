// SPDX-License-Identifier: Apache-2.0
#include "cfbg/authproto.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfbg
{

int quantize_phase(double theta, int grid)
{
    if (grid < 1)
        throw std::invalid_argument("quantize_phase: grid must be at least 1");
    const double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t < 0)
        t += two_pi;
    const double step = two_pi / grid;
    const double pos = t / step;
    auto idx = static_cast<long long>(std::floor(pos));
    // exact halfway points round down
    if (pos - static_cast<double>(idx) > 0.5)
        ++idx;
    return static_cast<int>(idx % grid);
}

double grid_phase(int index, int grid)
{
    if (grid < 1 || index < 0 || index >= grid)
        throw std::out_of_range("grid_phase: index outside the grid");
    return 2.0 * std::numbers::pi * index / grid;
}

std::uint32_t encode_pilot(int index, UserHalf half, const CfbgCodebook &book)
{
    if (index < 0)
        throw std::out_of_range("encode_pilot: negative index");
    return book.half_index(half, static_cast<std::size_t>(index));
}

int pilot_index(std::uint32_t codeword, UserHalf half, const CfbgCodebook &book)
{
    if (codeword >= book.usable_size() || book.owner(codeword) != half)
        throw std::out_of_range("pilot_index: codeword not in the user's half");
    return static_cast<int>(half == UserHalf::Bob ? codeword : codeword - book.half_size());
}

double decode_pilot(std::uint32_t codeword, UserHalf half, const CfbgCodebook &book, int grid)
{
    return grid_phase(pilot_index(codeword, half, book), grid);
}

std::vector<bool> activation_pattern(const BinaryWord &codeword)
{
    std::vector<bool> active(codeword.size());
    for (std::size_t i = 0; i < codeword.size(); ++i)
        active[i] = codeword.test(i);
    return active;
}

ObservedCodeword observe_pattern(const Digits &counts)
{
    for (auto c : counts)
        if (c > 3)
            throw std::invalid_argument("observe_pattern: counts must lie in 0..3");
    return {support(counts), counts};
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::NoAttack:
        return "no-attack";
    case Verdict::SilentOrAbsent:
        return "silent-or-absent";
    case Verdict::Jamming:
        return "jamming";
    case Verdict::SeparationError:
        return "separation-error";
    }
    return "unknown";
}

namespace
{

bool shares_half(const std::vector<std::uint32_t> &cws, const CfbgCodebook &book)
{
    for (std::size_t i = 0; i < cws.size(); ++i)
        for (std::size_t j = i + 1; j < cws.size(); ++j)
            if (book.owned(cws[i]) && book.owned(cws[j]) && book.owner(cws[i]) == book.owner(cws[j]))
                return true;
    return false;
}

BdcdResult with_codewords(Verdict v, const Constituents &c, const CfbgCodebook &book)
{
    BdcdResult r;
    r.verdict = v;
    r.codewords = c.to_vector();
    std::sort(r.codewords.begin(), r.codewords.end());
    r.ambiguous = shares_half(r.codewords, book);
    return r;
}

// Remove one count from every block and search again for the legitimate pair.
BdcdResult strip_wideband(const ObservedCodeword &g, const CfbgCodebook &book)
{
    Digits reduced(g.g_b.size());
    for (std::size_t i = 0; i < g.g_b.size(); ++i)
        reduced[i] = g.g_b[i] > 0 ? static_cast<std::uint8_t>(g.g_b[i] - 1) : 0;
    const BinaryWord pattern = support(reduced);
    if (auto c = book.decompose(pattern))
        return with_codewords(Verdict::Jamming, *c, book);
    BdcdResult r;
    r.verdict = Verdict::Jamming;
    r.lookup_miss = true;
    return r;
}

} // namespace

BdcdResult bdcd_decode(const ObservedCodeword &g, const CfbgCodebook &book)
{
    const std::size_t B = static_cast<std::size_t>(book.B());
    if (g.g_c.size() != B || g.g_b.size() != B)
        throw std::invalid_argument("bdcd_decode: observation length differs from B");
    for (std::size_t i = 0; i < B; ++i) {
        if (g.g_b[i] > 3)
            throw std::invalid_argument("bdcd_decode: counts must lie in 0..3");
        if (g.g_c.test(i) != (g.g_b[i] > 0))
            throw std::invalid_argument("bdcd_decode: presence and count vectors disagree");
    }

    const auto found = book.decompose(g.g_c);
    if (!found)
        return strip_wideband(g, book);

    if (g.g_c.all()) {
        BinaryWord reduced = g.g_c;
        bool any_single = false;
        for (std::size_t i = 0; i < B; ++i) {
            if (g.g_b[i] == 1) {
                reduced.set(i, false);
                any_single = true;
            }
        }
        if (!any_single)
            return strip_wideband(g, book);
        if (auto pair = book.decompose(reduced))
            return with_codewords(Verdict::Jamming, *pair, book);
        return with_codewords(Verdict::NoAttack, *found, book);
    }

    if (found->count == 3)
        return with_codewords(Verdict::NoAttack, *found, book);

    if (found->count == 1)
        return with_codewords(Verdict::SilentOrAbsent, *found, book);

    // two-way split: the counts under each constituent must add up to the same total
    std::array<unsigned, 2> s{0, 0};
    for (int j = 0; j < 2; ++j) {
        const BinaryWord &cw = book.codeword(found->index[j]);
        for (std::size_t i = 0; i < B; ++i)
            if (cw.test(i))
                s[j] += g.g_b[i];
    }
    if (s[0] != s[1]) {
        BdcdResult r;
        r.verdict = Verdict::SeparationError;
        return r;
    }
    return with_codewords(Verdict::SilentOrAbsent, *found, book);
}

SepValue sep_formula(double n_b, double n_total, double n_t)
{
    if (!(n_b > 0) || !(n_total > 0) || !(n_t > 0))
        throw std::domain_error("sep_formula: parameters must be positive");
    const double q = n_total * n_t / (7.0 * n_b);
    if (q < 3.0)
        throw std::domain_error("sep_formula: N_Total*N_T/(7*N_B) must be at least 3");
    SepValue v;
    v.sep = 1.0 / (q * q * q);
    v.sep_db = 10.0 * std::log10(v.sep);
    return v;
}

std::string to_string(EvaMode m)
{
    switch (m) {
    case EvaMode::Silent:
        return "silent";
    case EvaMode::WidebandJamming:
        return "jamming";
    case EvaMode::RandomImitation:
        return "imitation";
    }
    return "unknown";
}

EvaMode eva_mode_from_string(const std::string &s)
{
    if (s == "silent")
        return EvaMode::Silent;
    if (s == "jamming")
        return EvaMode::WidebandJamming;
    if (s == "imitation")
        return EvaMode::RandomImitation;
    throw std::invalid_argument("unknown attack mode '" + s + "'");
}

Digits ideal_counts(const CfbgCodebook &book, std::uint32_t bob, std::uint32_t charlie, EvaMode mode, std::uint32_t eva)
{
    std::vector<BinaryWord> words{book.codeword(bob), book.codeword(charlie)};
    if (mode == EvaMode::RandomImitation)
        words.push_back(book.codeword(eva));
    Digits counts = asp_sum(words);
    if (mode == EvaMode::WidebandJamming)
        for (auto &c : counts)
            c = static_cast<std::uint8_t>(std::min(3, c + 1));
    return counts;
}

void write_verdict_record(std::ostream &os, std::uint64_t trial, EvaMode truth, const BdcdResult &r, bool misclassified)
{
    os << trial << '|' << to_string(truth) << '|' << to_string(r.verdict) << '|';
    for (std::size_t i = 0; i < r.codewords.size(); ++i)
        os << (i ? "," : "") << r.codewords[i];
    os << '|' << (r.ambiguous ? 1 : 0) << '|' << (r.verdict == Verdict::SeparationError ? 1 : 0) << '|'
       << (misclassified ? 1 : 0) << '\n';
}

Verdict expected_verdict(EvaMode mode, bool duplicate)
{
    switch (mode) {
    case EvaMode::Silent:
        return Verdict::SilentOrAbsent;
    case EvaMode::WidebandJamming:
        return Verdict::Jamming;
    case EvaMode::RandomImitation:
        return duplicate ? Verdict::SeparationError : Verdict::NoAttack;
    }
    return Verdict::SeparationError;
}

} // namespace cfbg
