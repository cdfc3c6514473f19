#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rdht/distribution.hpp"
#include "rdht/errors.hpp"

using namespace rdht;

TEST_CASE("symmetric tie keeps lower id first") {
    Distribution dist = canonicalize({{0, 0.5}, {1, 0.5}}, 8);
    REQUIRE(dist.size() == 2);
    CHECK(dist.entries[0].token == 0);
    CHECK(dist.entries[0].micros == 500000);
    CHECK(dist.entries[1].token == 1);
    CHECK(dist.entries[1].micros == 500000);
}

TEST_CASE("top_k cut renormalizes to exactly one") {
    Distribution dist = canonicalize({{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 / 3}}, 2);
    REQUIRE(dist.size() == 2);
    CHECK(dist.entries[0].micros + dist.entries[1].micros == kProbOne);
    CHECK(dist.entries[0].micros == 500000);
    CHECK(dist.entries[0].token == 0);
    CHECK(dist.entries[1].token == 1);
}

TEST_CASE("residual quantum lands on the heaviest entry") {
    // 1/3 each over three entries: 333333 * 3 = 999999, so the first entry
    // (lowest id on the tie) absorbs the missing quantum.
    Distribution dist = canonicalize({{5, 1.0}, {6, 1.0}, {7, 1.0}}, 8);
    REQUIRE(dist.size() == 3);
    CHECK(dist.entries[0].token == 5);
    CHECK(dist.entries[0].micros == 333334);
    CHECK(dist.entries[1].micros == 333333);
    CHECK(dist.entries[2].micros == 333333);
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_WITH_AS(canonicalize({{0, 0.0}}, 8), "empty distribution", RdhError);
    CHECK_THROWS_WITH_AS(canonicalize({}, 8), "empty distribution", RdhError);
    CHECK_THROWS_AS(canonicalize({{0, -0.25}}, 8), RdhError);
    CHECK_THROWS_AS(canonicalize({{0, 0.5}, {0, 0.5}}, 8), RdhError);
}

TEST_CASE("canonical outputs are ordered, deduplicated and normalized") {
    std::mt19937_64 rng(19);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<ScoredToken> raw;
        std::size_t count = 1 + rng() % 12;
        for (std::size_t i = 0; i < count; ++i) {
            raw.push_back({static_cast<TokenId>(i * 3 + 1),
                           static_cast<double>(rng() % 1000) / 250.0});
        }
        raw[rng() % count].weight += 1.0; // at least one positive entry
        std::size_t top_k = 1 + rng() % 8;
        Distribution dist = canonicalize(raw, top_k);
        CHECK(dist.size() <= top_k);
        check_canonical(dist); // throws on violation
        std::uint64_t sum = 0;
        for (const auto& e : dist.entries) sum += e.micros;
        CHECK(sum == kProbOne);
    }
}
