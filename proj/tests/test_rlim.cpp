#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <sstream>

#include "mcldp/rlim.hpp"
#include "support/oracles.hpp"

using namespace mcldp;
using namespace mcldp::rlim;

TEST_CASE("rll counts match brute-force enumeration up to n = 20") {
    for (uint32_t n = 0; n <= 20; ++n) {
        CAPTURE(n);
        CHECK(rll_count(n, false) == test::rll_count_bruteforce(n, false));
        CHECK(rll_count(n, true) == test::rll_count_bruteforce(n, true));
    }
}

TEST_CASE("rll count fixtures") {
    CHECK(rll_count(3, false) == 4);   // 000 001 010 100
    CHECK(rll_count(6, false) == 13);
    CHECK(rll_count(7, false) == 19);
    CHECK(rll_count(2, true) == 1);    // only 00
    CHECK(rll_count(9, true) == 19);
}

TEST_CASE("codebook picks the shortest feasible length") {
    CHECK(Codebook::build(16, true).word_bits() == 9);
    CHECK(Codebook::build(16, false).word_bits() == 7);
    CHECK(Codebook::build(81, true).word_bits() == 13);
    SUBCASE("single-word codebook degenerates to one zero bit") {
        auto book = Codebook::build(1, true);
        CHECK(book.word_bits() == 1);
        CHECK(book.size() == 1);
        CHECK(book.word(0) == 0);
    }
    SUBCASE("oversized codebooks are refused") {
        CHECK_THROWS_AS(Codebook::build(uint64_t{1} << 21, true), std::invalid_argument);
    }
}

TEST_CASE("codebook ordering, validity and weight minimality") {
    for (uint64_t size : {4ull, 16ull, 81ull, 128ull}) {
        for (bool safe : {true, false}) {
            CAPTURE(size);
            CAPTURE(safe);
            auto book = Codebook::build(size, safe);
            const uint32_t n = book.word_bits();

            // Every selected word satisfies the constraint; word 0 is all-zero;
            // ordering is (weight, numeric).
            CHECK(book.word(0) == 0);
            int prev_weight = -1;
            uint64_t prev_word = 0;
            uint32_t max_selected_weight = 0;
            for (uint32_t i = 0; i < size; ++i) {
                uint64_t w = book.word(i);
                CHECK(test::rll_valid(w, n, safe));
                int weight = std::popcount(w);
                if (weight == prev_weight) CHECK(w > prev_word);
                CHECK(weight >= prev_weight);
                prev_weight = weight;
                prev_word = w;
                max_selected_weight = std::max<uint32_t>(max_selected_weight, weight);
            }

            // No excluded valid word is lighter than a selected one.
            uint32_t min_excluded_weight = UINT32_MAX;
            for (uint64_t w = 0; w < (uint64_t{1} << n); ++w) {
                if (!test::rll_valid(w, n, safe)) continue;
                if (!book.index_of(w).has_value())
                    min_excluded_weight =
                        std::min<uint32_t>(min_excluded_weight, std::popcount(w));
            }
            if (min_excluded_weight != UINT32_MAX) CHECK(max_selected_weight <= min_excluded_weight);
        }
    }
}

TEST_CASE("last-wins repair fixtures") {
    auto correct = [](std::vector<uint8_t> in, bool safe = false) {
        return rlim_correct(in, safe);
    };
    CHECK(correct({1, 1, 0, 0}) == std::vector<uint8_t>{0, 1, 0, 0});
    CHECK(correct({1, 0, 1, 0, 1}) == std::vector<uint8_t>{0, 0, 0, 0, 1});
    CHECK(correct({1, 0, 0, 1, 0, 1}) == std::vector<uint8_t>{1, 0, 0, 0, 0, 1});
    CHECK(correct({0, 1, 0, 0, 1, 0}) == std::vector<uint8_t>{0, 1, 0, 0, 1, 0});  // already valid
    CHECK(correct({1, 0, 1, 0, 1}, true) == std::vector<uint8_t>{0, 0, 0, 0, 0});
    CHECK(correct({}, false).empty());
    CHECK(correct({1}, true) == std::vector<uint8_t>{0});
}

TEST_CASE("last-wins repair equals the pair-rewriting oracle on all short strings") {
    for (uint32_t n = 0; n <= 12; ++n) {
        for (uint64_t w = 0; w < (uint64_t{1} << n); ++w) {
            std::vector<uint8_t> bits(n);
            for (uint32_t t = 0; t < n; ++t) bits[t] = (w >> (n - 1 - t)) & 1;
            for (bool safe : {false, true}) {
                auto got = rlim_correct(bits, safe);
                auto want = test::rlim_correct_oracle(bits, safe);
                CAPTURE(n);
                CAPTURE(w);
                CAPTURE(safe);
                CHECK(got == want);
            }
        }
    }
}

TEST_CASE("repair is idempotent and always yields valid strings") {
    Rng rng(41);
    for (int rep = 0; rep < 500; ++rep) {
        uint32_t n = 1 + static_cast<uint32_t>(rng.below(64));
        std::vector<uint8_t> bits(n);
        for (auto& b : bits) b = static_cast<uint8_t>(rng.below(2));
        for (bool safe : {false, true}) {
            auto once = rlim_correct(bits, safe);
            uint64_t packed = 0;
            for (uint8_t b : once) packed = (packed << 1) | b;
            CHECK(test::rll_valid(packed, n, safe));
            CHECK(rlim_correct(once, safe) == once);
        }
    }
}

TEST_CASE("decode round trips over a clean channel") {
    for (uint64_t size : {16ull, 81ull}) {
        auto book = Codebook::build(size, true);
        for (uint32_t s = 0; s < size; ++s) {
            auto bits = book.word_as_bits(s);
            auto decoded = rlim_decode(bits, book);
            REQUIRE(decoded.has_value());
            CHECK(*decoded == s);
        }
    }
}

TEST_CASE("decode flags repaired words outside the selected set") {
    auto book = Codebook::build(16, true);  // n=9, max selected weight 2
    std::vector<uint8_t> heavy{1, 0, 0, 1, 0, 0, 1, 0, 0};  // valid but weight 3
    CHECK(!rlim_decode(heavy, book).has_value());
    CHECK_THROWS_AS(rlim_decode(std::vector<uint8_t>{1, 0}, book), std::invalid_argument);
}

TEST_CASE("single adjacent insertions are repaired to valid words") {
    auto book = Codebook::build(81, true);
    Rng rng(77);
    for (int rep = 0; rep < 300; ++rep) {
        auto s = static_cast<uint32_t>(rng.below(book.size()));
        auto bits = book.word_as_bits(s);
        // Flip a 0 right after an existing 1 when there is one; otherwise any 0.
        std::size_t target = SIZE_MAX;
        for (std::size_t t = 0; t + 1 < bits.size(); ++t)
            if (bits[t] == 1 && bits[t + 1] == 0) target = t + 1;
        if (target == SIZE_MAX) target = bits.size() - 1;
        bits[target] = 1;
        auto repaired = rlim_correct(bits, true);
        uint64_t packed = 0;
        for (uint8_t b : repaired) packed = (packed << 1) | b;
        CHECK(test::rll_valid(packed, book.word_bits(), true));
    }
}

TEST_CASE("codebook dump is one word per line in index order") {
    auto book = Codebook::build(4, true);
    REQUIRE(book.word_bits() == 5);  // safe words need three usable positions
    std::ostringstream out;
    book.dump(out);
    CHECK(out.str() == "00000\n00100\n01000\n10000\n");
}
