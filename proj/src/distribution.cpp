#include "rdht/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace rdht {

Distribution canonicalize(std::vector<ScoredToken> raw, std::size_t top_k) {
    if (top_k == 0) fail(ErrorKind::usage, "top_k must be positive");

    std::vector<ScoredToken> kept;
    kept.reserve(raw.size());
    for (const ScoredToken& e : raw) {
        if (std::isnan(e.weight) || e.weight < 0.0) {
            fail(ErrorKind::usage, "negative probability");
        }
        if (e.weight > 0.0) kept.push_back(e);
    }
    if (kept.empty()) fail(ErrorKind::usage, "empty distribution");

    {
        std::unordered_set<TokenId> seen;
        for (const ScoredToken& e : kept) {
            if (!seen.insert(e.token).second) {
                fail(ErrorKind::usage, "duplicate token in distribution");
            }
        }
    }

    std::sort(kept.begin(), kept.end(), [](const ScoredToken& a, const ScoredToken& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.token < b.token;
    });
    if (kept.size() > top_k) kept.resize(top_k);

    double total = 0.0;
    for (const ScoredToken& e : kept) total += e.weight;

    std::vector<DistEntry> entries;
    entries.reserve(kept.size());
    std::int64_t sum = 0;
    for (const ScoredToken& e : kept) {
        auto micros = static_cast<std::int64_t>(std::llround((e.weight / total) * kProbOne));
        entries.push_back({e.token, static_cast<std::uint32_t>(micros)});
        sum += micros;
    }

    // Residual quantum goes to the heaviest entry (first in kept order).
    std::int64_t residual = static_cast<std::int64_t>(kProbOne) - sum;
    std::int64_t adjusted = static_cast<std::int64_t>(entries.front().micros) + residual;
    if (adjusted <= 0) fail(ErrorKind::usage, "quantization residual exceeds top entry");
    entries.front().micros = static_cast<std::uint32_t>(adjusted);

    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [](const DistEntry& e) { return e.micros == 0; }),
                  entries.end());

    std::sort(entries.begin(), entries.end(), [](const DistEntry& a, const DistEntry& b) {
        if (a.micros != b.micros) return a.micros > b.micros;
        return a.token < b.token;
    });

    Distribution dist{std::move(entries)};
    check_canonical(dist);
    return dist;
}

void check_canonical(const Distribution& dist) {
    if (dist.empty()) fail(ErrorKind::usage, "empty distribution");
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < dist.entries.size(); ++i) {
        const DistEntry& e = dist.entries[i];
        if (e.micros == 0) fail(ErrorKind::usage, "zero-mass distribution entry");
        if (i > 0) {
            const DistEntry& prev = dist.entries[i - 1];
            bool ordered = prev.micros > e.micros ||
                           (prev.micros == e.micros && prev.token < e.token);
            if (!ordered) fail(ErrorKind::usage, "distribution not in canonical order");
        }
        sum += e.micros;
    }
    if (sum != kProbOne) fail(ErrorKind::usage, "distribution mass does not sum to one");
}

} // namespace rdht
