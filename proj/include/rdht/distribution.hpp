#pragma once

#include <cstdint>
#include <vector>

#include "rdht/token.hpp"

namespace rdht {

// Probabilities are carried as integer multiples of 1e-6 ("micros") so that
// every coding decision is exact integer arithmetic on both ends.
inline constexpr std::uint32_t kProbOne = 1'000'000;

inline constexpr std::size_t kDefaultTopK = 64;

struct DistEntry {
    TokenId token;
    std::uint32_t micros;
};

// Canonicalized candidate list for one masked slot: entries sorted by
// (micros descending, token ascending), micros summing to exactly kProbOne.
struct Distribution {
    std::vector<DistEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    const DistEntry& top() const { return entries.front(); }
};

struct ScoredToken {
    TokenId token;
    double weight; // non-negative relative weight, need not be normalized
};

// Keeps the top_k heaviest entries (ties by token id ascending), renormalizes
// over the kept mass, quantizes to micros, and hands any residual quantum to
// the heaviest entry. Entries that quantize to zero are dropped.
Distribution canonicalize(std::vector<ScoredToken> raw, std::size_t top_k);

// Throws on ordering, duplicate-token or sum violations.
void check_canonical(const Distribution& dist);

} // namespace rdht
