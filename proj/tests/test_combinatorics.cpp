#include "cfbg/codebook.hpp"
#include "cfbg/combinatorics.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

using namespace cfbg;

namespace
{

std::vector<BinaryWord> words(std::initializer_list<const char *> bits)
{
    std::vector<BinaryWord> out;
    for (const char *b : bits)
        out.push_back(BinaryWord::from_string(b));
    return out;
}

// Brute force over all pairs, independent of the construction.
int min_distance(const MdsCode &code)
{
    int d = code.n;
    for (std::size_t i = 0; i < code.codewords.size(); ++i)
        for (std::size_t j = i + 1; j < code.codewords.size(); ++j)
            d = std::min(d, hamming_distance(code.codewords[i], code.codewords[j]));
    return d;
}

} // namespace

TEST_CASE("BinaryWord - bit operations")
{
    const BinaryWord a = BinaryWord::from_string("1100101");
    CHECK(a.size() == 7);
    CHECK(a.weight() == 4);
    CHECK(a.to_string() == "1100101");
    CHECK(a.test(0));
    CHECK_FALSE(a.test(2));
    CHECK(a.includes(BinaryWord::from_string("0100001")));
    CHECK_FALSE(a.includes(BinaryWord::from_string("0010000")));
    CHECK((a | BinaryWord::from_string("0011010")).all());
    CHECK(BinaryWord(70).none());
    CHECK_THROWS_AS(BinaryWord::from_string("10x"), std::invalid_argument);
    CHECK_THROWS_AS(a.test(7), std::out_of_range);
    CHECK_THROWS_AS(a.includes(BinaryWord(8)), std::invalid_argument);
}

TEST_CASE("BinaryWord - words longer than one block")
{
    BinaryWord w(130);
    w.set(0);
    w.set(64);
    w.set(129);
    CHECK(w.weight() == 3);
    CHECK(BinaryWord::from_string(w.to_string()) == w);
    w.set(64, false);
    CHECK(w.weight() == 2);
}

TEST_CASE("Superposition - Boolean and arithmetic sums")
{
    const auto ws = words({"1100", "1010", "0110"});
    CHECK(sp_sum(ws).to_string() == "1110");
    const Digits d = asp_sum(ws);
    CHECK(d == Digits{2, 2, 2, 0});
    CHECK(support(d) == sp_sum(ws));
    CHECK(asp_sum(words({"1001"})) == Digits{1, 0, 0, 1});
    CHECK_THROWS_AS(sp_sum({}), std::invalid_argument);
    CHECK_THROWS_AS(asp_sum(words({"10", "100"})), std::invalid_argument);
}

TEST_CASE("MDS code - parameters and minimum distance")
{
    for (auto [q, k] : {std::pair{7, 2}, std::pair{7, 3}, std::pair{5, 2}, std::pair{11, 4}}) {
        const MdsCode code = build_mds_code(q, k);
        CHECK(code.n == 3 * k - 2);
        CHECK(code.r == code.n - k);
        CHECK(code.d == code.n - k + 1);
        std::size_t size = 1;
        for (int i = 0; i < k; ++i)
            size *= static_cast<std::size_t>(q);
        REQUIRE(code.codewords.size() == size);
        if (size <= 400)
            CHECK(min_distance(code) == code.d);
    }
}

TEST_CASE("MDS code - systematic and distinct")
{
    const MdsCode code = build_mds_code(7, 3);
    std::set<std::vector<int>> messages, all;
    for (const auto &c : code.codewords) {
        messages.insert({c.begin(), c.begin() + 3});
        all.insert(c);
        for (int s : c)
            CHECK((s >= 0 && s < 7));
    }
    CHECK(messages.size() == 343);
    CHECK(all.size() == 343);
}

TEST_CASE("MDS code - rejects unsupported parameters")
{
    CHECK_THROWS_AS(build_mds_code(6, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_mds_code(7, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_mds_code(7, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_mds_code(3, 3), std::invalid_argument);
    CHECK(is_prime(7));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(9));
}

TEST_CASE("Latin cubes - q=7 construction")
{
    const MdsCode code = build_mds_code(7, 3);
    auto cubes = latin_cubes_from_mds(code);
    REQUIRE(cubes.size() == 4);
    for (const auto &c : cubes)
        CHECK(is_latin_cube(c));
    CHECK(are_mutually_orthogonal(cubes));

    // swapping two entries of one line breaks the Latin property
    LatinCube broken = cubes[0];
    std::swap(broken.entries[0], broken.entries[7]);
    CHECK_FALSE(is_latin_cube(broken));

    // two copies of the same cube are not orthogonal
    CHECK_FALSE(are_mutually_orthogonal({cubes[0], cubes[0]}));
    CHECK_THROWS_AS(latin_cubes_from_mds(build_mds_code(7, 2)), std::invalid_argument);
}

TEST_CASE("ZFD image - one-hot groups")
{
    const MdsCode code = build_mds_code(7, 2);
    const ZfdCode z = mds_to_zfd(code);
    CHECK(z.B == 28);
    REQUIRE(z.codewords.size() == 49);
    for (std::size_t c = 0; c < z.codewords.size(); ++c) {
        CHECK(z.codewords[c].weight() == 4);
        for (int i = 0; i < code.n; ++i)
            CHECK(z.codewords[c].test(static_cast<std::size_t>(i * 7 + code.codewords[c][i])));
    }
}

TEST_CASE("ZFD verification - q=7 k=2 passes both properties")
{
    const ZfdCode z = mds_to_zfd(build_mds_code(7, 2));
    const VerifyReport r = verify_zfd(z.codewords, 3);
    CHECK(r.ok);
    CHECK(r.checks > 0);
    CHECK(verify_bd_property(z.codewords).ok);
}

TEST_CASE("ZFD verification - counterexamples")
{
    // {1100, 0011} and {0110, 1001} have the same Boolean sum
    const VerifyReport r = verify_zfd(words({"1100", "0011", "0110", "1001"}), 2);
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.witness.empty());
    CHECK_FALSE(r.reason.empty());

    // clearing the single-count digits of 110 + 011 leaves the codeword 011
    CHECK_FALSE(verify_bd_property(words({"110", "011", "101"})).ok);
}

TEST_CASE("ZFD verification - work budget")
{
    const ZfdCode z = mds_to_zfd(build_mds_code(7, 2));
    CHECK_THROWS_AS(verify_zfd(z.codewords, 3, 100), ResourceError);
    CHECK_THROWS_AS(verify_bd_property(z.codewords, 100), ResourceError);
    CHECK(subsets_up_to(49, 3) == Catch::Approx(49 + 1176 + 18424));
}

TEST_CASE("Codebook - halves and spare codeword")
{
    const CfbgCodebook book = CfbgCodebook::build(7, 2);
    CHECK(book.full_size() == 49);
    CHECK(book.usable_size() == 48);
    CHECK(book.half_size() == 24);
    CHECK(book.owner(book.half_index(UserHalf::Bob, 3)) == UserHalf::Bob);
    CHECK(book.owner(book.half_index(UserHalf::Charlie, 3)) == UserHalf::Charlie);
    CHECK_FALSE(book.owned(48));
    CHECK_THROWS_AS(book.owner(48), std::out_of_range);
    CHECK_THROWS_AS(book.half_index(UserHalf::Bob, 24), std::out_of_range);
    CHECK(book.materialized());
    // all pairs and triples of the 49 codewords
    CHECK(book.g1_size() == 1176);
    CHECK(book.g2_size() == 18424);
}

TEST_CASE("Codebook - decomposition recovers sampled subsets")
{
    const CfbgCodebook book = CfbgCodebook::build(7, 2);
    const std::uint32_t c = static_cast<std::uint32_t>(book.full_size());
    std::uint64_t checked = 0;
    for (std::uint32_t a = 0; a < c; ++a) {
        for (std::uint32_t b = a + 1; b < c; b += 5) {
            for (std::uint32_t d = b + 1; d < c; d += 7) {
                const BinaryWord p = sp_sum({book.codeword(a), book.codeword(b), book.codeword(d)});
                const auto m = book.decompose(p);
                const auto s = book.decompose_by_scan(p);
                REQUIRE(m);
                REQUIRE(s);
                CHECK(m->to_vector() == std::vector<std::uint32_t>{a, b, d});
                CHECK(s->to_vector() == m->to_vector());
                ++checked;
            }
            const auto pair = book.decompose(sp_sum({book.codeword(a), book.codeword(b)}));
            REQUIRE(pair);
            CHECK(pair->to_vector() == std::vector<std::uint32_t>{a, b});
        }
    }
    CHECK(checked > 500);
    CHECK_FALSE(book.decompose(BinaryWord(28)));
    CHECK_THROWS_AS(book.decompose(BinaryWord(27)), std::invalid_argument);
}

TEST_CASE("Codebook - scan mode matches materialized lookups")
{
    const CfbgCodebook map = CfbgCodebook::build(7, 2);
    const CfbgCodebook scan = CfbgCodebook::build(7, 2, 0);
    CHECK_FALSE(scan.materialized());
    for (std::uint32_t a = 0; a < 49; a += 3)
        for (std::uint32_t b = a + 1; b < 49; b += 4) {
            const BinaryWord p = sp_sum({map.codeword(a), map.codeword(b), map.codeword((a + b) % 49)});
            const auto x = map.decompose(p);
            const auto y = scan.decompose(p);
            REQUIRE(x.has_value() == y.has_value());
            if (x)
                CHECK(x->to_vector() == y->to_vector());
        }
}

TEST_CASE("Codebook - save and load round trip")
{
    const CfbgCodebook book = CfbgCodebook::build(7, 2);
    std::stringstream ss;
    book.save(ss);
    const CfbgCodebook back = CfbgCodebook::load(ss);
    CHECK(back.q() == 7);
    CHECK(back.k() == 2);
    CHECK(back.all_codewords() == book.all_codewords());

    std::istringstream bad("not a codebook\n");
    CHECK_THROWS_AS(CfbgCodebook::load(bad), std::invalid_argument);
}

TEST_CASE("Codebook - rejects codewords that are not ZFD")
{
    auto z = mds_to_zfd(build_mds_code(7, 2)).codewords;
    z[1] = z[0];
    CHECK_THROWS_AS(CfbgCodebook::from_codewords(7, 2, z), std::invalid_argument);
}
