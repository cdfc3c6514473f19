#include "rdht/rdh.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace rdht {

bool PositionKey::contains(std::uint32_t position) const {
    return std::binary_search(positions.begin(), positions.end(), position);
}

void PositionKey::validate() const {
    if (positions.empty()) fail(ErrorKind::usage, "key has no positions");
    if (positions.front() < 1) fail(ErrorKind::usage, "key positions are 1-based");
    for (std::size_t i = 1; i < positions.size(); ++i) {
        if (positions[i] <= positions[i - 1]) {
            fail(ErrorKind::usage, "key positions must be strictly increasing");
        }
    }
    if (positions.back() > m) fail(ErrorKind::usage, "key out of range");
}

PositionKey gen_key(std::size_t n, std::size_t m, std::uint64_t seed, KeyMode mode) {
    if (n < 1) fail(ErrorKind::usage, "cover must have at least one token");
    if (n > m) fail(ErrorKind::usage, "cover longer than marked text");

    PositionKey key;
    key.m = static_cast<std::uint32_t>(m);
    key.positions.reserve(n);
    if (mode == KeyMode::even) {
        for (std::size_t j = 1; j <= n; ++j) {
            auto p = static_cast<std::uint32_t>((j * m + n - 1) / n);
            if (!key.positions.empty() && p <= key.positions.back()) {
                p = key.positions.back() + 1;
            }
            key.positions.push_back(p);
        }
    } else {
        // Partial Fisher-Yates; modulo draw keeps the generator portable.
        std::vector<std::uint32_t> pool(m);
        std::iota(pool.begin(), pool.end(), 1u);
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng() % (m - i));
            std::swap(pool[i], pool[j]);
        }
        key.positions.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
        std::sort(key.positions.begin(), key.positions.end());
    }
    key.validate();
    return key;
}

PositionKey load_key(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open key file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::io, "invalid key file: " + path);
    }
    PositionKey key;
    try {
        key.m = doc.at("m").get<std::uint32_t>();
        key.positions = doc.at("positions").get<std::vector<std::uint32_t>>();
        if (doc.at("n").get<std::size_t>() != key.positions.size()) {
            fail(ErrorKind::io, "invalid key file: n does not match positions");
        }
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::io, "invalid key file: " + path);
    }
    key.validate();
    return key;
}

void save_key(const PositionKey& key, const std::string& path) {
    key.validate();
    nlohmann::ordered_json doc;
    doc["n"] = key.positions.size();
    doc["m"] = key.m;
    doc["positions"] = key.positions;
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot open key file for writing: " + path);
    out << doc.dump() << '\n';
    if (!out) fail(ErrorKind::io, "key write failed: " + path);
}

MaskedText init_masked(const TokenIds& cover, const PositionKey& key) {
    key.validate();
    if (cover.size() != key.positions.size()) {
        fail(ErrorKind::usage, "key/cover length mismatch");
    }
    MaskedText slots(key.m);
    for (std::size_t j = 0; j < cover.size(); ++j) {
        slots[key.positions[j] - 1] = cover[j];
    }
    return slots;
}

TokenIds reconstruct(const TokenIds& marked, const PositionKey& key) {
    if (key.positions.empty()) fail(ErrorKind::usage, "key has no positions");
    if (key.positions.back() > marked.size()) fail(ErrorKind::usage, "key out of range");
    TokenIds cover;
    cover.reserve(key.positions.size());
    for (std::uint32_t p : key.positions) cover.push_back(marked[p - 1]);
    return cover;
}

std::vector<std::string> reconstruct_surfaces(const std::vector<std::string>& marked,
                                              const PositionKey& key) {
    if (key.positions.empty()) fail(ErrorKind::usage, "key has no positions");
    if (key.positions.back() > marked.size()) fail(ErrorKind::usage, "key out of range");
    std::vector<std::string> cover;
    cover.reserve(key.positions.size());
    for (std::uint32_t p : key.positions) cover.push_back(marked[p - 1]);
    return cover;
}

EmbedResult embed_with_source(const MaskedText& masked, Predictor& predictor,
                              const EncoderConfig& config, BitSource& source) {
    const Vocabulary& vocab = predictor.vocabulary();
    MaskedText state = masked;
    EmbedResult result;
    result.marked.reserve(state.size());

    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i].has_value()) continue;
        Distribution dist = predictor.predict(state, i);
        StepResult step = encode_step(config, dist, source, vocab);
        state[i] = step.token;
        if (step.degraded) ++result.report.degraded_steps;
        result.report.steps.push_back({static_cast<std::uint32_t>(i + 1), step.bits,
                                       step.token, step.degraded});
    }

    for (const auto& slot : state) result.marked.push_back(*slot);
    result.report.capacity = source.consumed();
    result.report.padding_bits = source.padding();
    result.report.bits_embedded = source.consumed() - source.padding();
    result.report.exhausted = source.padding() > 0;
    return result;
}

std::uint64_t capacity_estimate(const MaskedText& masked, Predictor& predictor,
                                const EncoderConfig& config) {
    if (config.strategy == Strategy::bins) {
        std::uint64_t slots = 0;
        for (const auto& slot : masked) {
            if (!slot.has_value()) ++slots;
        }
        return slots * static_cast<std::uint64_t>(config.bins_bits);
    }
    // Dry-run on a clone where possible so stateful predictors only ever see
    // the real pass.
    std::unique_ptr<Predictor> scratch = predictor.clone();
    Predictor& probe = scratch ? *scratch : predictor;
    ZeroSource zeros;
    embed_with_source(masked, probe, config, zeros);
    return zeros.consumed();
}

EmbedResult embed(const MaskedText& masked, Predictor& predictor,
                  const EncoderConfig& config, const BitStream& payload) {
    const std::uint64_t need = payload.size();
    const std::uint64_t capacity = capacity_estimate(masked, predictor, config);
    if (need > capacity) {
        fail(ErrorKind::capacity, "insufficient capacity: need " + std::to_string(need) +
                                      ", have " + std::to_string(capacity));
    }

    BitStream source(payload.bits());
    EmbedResult result = embed_with_source(masked, predictor, config, source);
    if (source.cursor() < source.size()) {
        // The realized run consumed fewer bits than the dry-run estimate
        // (possible for huffman, whose step lengths follow the payload).
        fail(ErrorKind::capacity, "insufficient capacity: need " + std::to_string(need) +
                                      ", have " + std::to_string(source.cursor()));
    }
    result.report.capacity = capacity;
    return result;
}

BitStream extract_bits(const TokenIds& marked, const PositionKey& key,
                       Predictor& predictor, const EncoderConfig& config) {
    key.validate();
    if (marked.size() != key.m) fail(ErrorKind::usage, "key out of range");
    const Vocabulary& vocab = predictor.vocabulary();

    TokenIds cover = reconstruct(marked, key);
    MaskedText state = init_masked(cover, key);
    static const Distribution kNoDist{};

    BitStream out;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i].has_value()) continue;
        if (config.strategy == Strategy::bins) {
            out.append(decode_step(config, kNoDist, marked[i], vocab));
        } else {
            Distribution dist = predictor.predict(state, i);
            out.append(decode_step(config, dist, marked[i], vocab));
        }
        state[i] = marked[i];
    }
    return out;
}

BitStream extract(const TokenIds& marked, const PositionKey& key,
                  Predictor& predictor, const EncoderConfig& config) {
    return unframe(extract_bits(marked, key, predictor, config));
}

BitStream extract_bits_surfaces(const std::vector<std::string>& marked_surfaces,
                                const PositionKey& key, Predictor& predictor,
                                const EncoderConfig& config) {
    if (config.strategy == Strategy::bins) {
        return extract_bits_model_free(marked_surfaces, key, config);
    }
    key.validate();
    if (marked_surfaces.size() != key.m) fail(ErrorKind::usage, "key out of range");
    const Vocabulary& vocab = predictor.vocabulary();

    TokenIds cover;
    cover.reserve(key.positions.size());
    for (std::uint32_t p : key.positions) {
        auto id = vocab.lookup(marked_surfaces[p - 1]);
        if (!id) fail(ErrorKind::inconsistency, "inconsistent marked text");
        cover.push_back(*id);
    }
    MaskedText state = init_masked(cover, key);

    BitStream out;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i].has_value()) continue;
        // Predict first: a session vocabulary interns this step's
        // candidates before the observed token is resolved.
        Distribution dist = predictor.predict(state, i);
        auto observed = vocab.lookup(marked_surfaces[i]);
        if (!observed) fail(ErrorKind::inconsistency, "inconsistent marked text");
        out.append(decode_step(config, dist, *observed, vocab));
        state[i] = *observed;
    }
    return out;
}

BitStream extract_bits_model_free(const std::vector<std::string>& marked_surfaces,
                                  const PositionKey& key, const EncoderConfig& config) {
    if (config.strategy != Strategy::bins) {
        fail(ErrorKind::usage, "model-free extraction requires the bins strategy");
    }
    if (config.bins_bits < 1 || config.bins_bits > 20) {
        fail(ErrorKind::usage, "bins_bits out of range [1, 20]");
    }
    key.validate();
    if (marked_surfaces.size() != key.m) fail(ErrorKind::usage, "key out of range");

    BitStream out;
    const int r = config.bins_bits;
    for (std::size_t i = 0; i < marked_surfaces.size(); ++i) {
        if (key.contains(static_cast<std::uint32_t>(i + 1))) continue;
        std::uint32_t subset = bins_subset(config.salt, marked_surfaces[i], r);
        for (int b = r - 1; b >= 0; --b) {
            out.append_bit(static_cast<std::uint8_t>((subset >> b) & 1u));
        }
    }
    return out;
}

BitStream extract_model_free(const std::vector<std::string>& marked_surfaces,
                             const PositionKey& key, const EncoderConfig& config) {
    return unframe(extract_bits_model_free(marked_surfaces, key, config));
}

} // namespace rdht
