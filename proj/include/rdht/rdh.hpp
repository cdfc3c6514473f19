#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdht/bitstream.hpp"
#include "rdht/coders.hpp"
#include "rdht/predictor.hpp"
#include "rdht/token.hpp"

namespace rdht {

// Strictly increasing 1-based positions placing the cover tokens inside a
// marked text of length m. The key is the sole reconstruction secret.
struct PositionKey {
    std::vector<std::uint32_t> positions;
    std::uint32_t m = 0;

    std::size_t n() const { return positions.size(); }
    bool contains(std::uint32_t position) const;
    void validate() const;
};

enum class KeyMode { even, random };

// Deterministic key generation: even spreads positions as ceil(j*m/n),
// random draws n positions from 1..m without replacement under the seed.
PositionKey gen_key(std::size_t n, std::size_t m, std::uint64_t seed, KeyMode mode);

PositionKey load_key(const std::string& path);
void save_key(const PositionKey& key, const std::string& path);

// Masked text with the cover distributed per the key: slot p_j holds
// cover[j], every other slot is the mask sentinel.
MaskedText init_masked(const TokenIds& cover, const PositionKey& key);

// Cover tokens collected back from the key positions. Needs no model.
TokenIds reconstruct(const TokenIds& marked, const PositionKey& key);
std::vector<std::string> reconstruct_surfaces(const std::vector<std::string>& marked,
                                              const PositionKey& key);

struct StepLog {
    std::uint32_t position; // 1-based slot index
    Bits bits;
    TokenId token;
    bool degraded;
};

struct EmbedReport {
    std::uint64_t capacity = 0;      // bits this instance can carry
    std::uint64_t bits_embedded = 0; // payload bits consumed, padding excluded
    std::uint64_t padding_bits = 0;
    bool exhausted = false;
    std::size_t degraded_steps = 0;
    std::vector<StepLog> steps;
};

struct EmbedResult {
    TokenIds marked;
    EmbedReport report;
};

// Core left-to-right fill: every masked slot is predicted against the
// current partially-filled text and replaced by the coder's choice. The
// source decides how many bits each step consumes; it is never required to
// be finite.
EmbedResult embed_with_source(const MaskedText& masked, Predictor& predictor,
                              const EncoderConfig& config, BitSource& source);

// Bits the instance can carry: closed form for bins, an all-zero dry run
// for the probability-dependent strategies.
std::uint64_t capacity_estimate(const MaskedText& masked, Predictor& predictor,
                                const EncoderConfig& config);

// Strict embedding of a framed payload (32-bit length header first).
// Fails with "insufficient capacity" when the payload cannot be carried;
// slots past payload exhaustion consume zero padding.
EmbedResult embed(const MaskedText& masked, Predictor& predictor,
                  const EncoderConfig& config, const BitStream& payload);

// Replays the embedding contexts left to right and recovers the raw bit
// stream (header included). For bins the predictor is not consulted.
BitStream extract_bits(const TokenIds& marked, const PositionKey& key,
                       Predictor& predictor, const EncoderConfig& config);

// extract_bits followed by unframing; returns the exact payload.
BitStream extract(const TokenIds& marked, const PositionKey& key,
                  Predictor& predictor, const EncoderConfig& config);

// Surface-driven replay: token ids are resolved step by step against the
// predictor's vocabulary, which lets a growing session vocabulary assign
// ids in the same order it did during embedding. Bins requests are routed
// through the model-free path.
BitStream extract_bits_surfaces(const std::vector<std::string>& marked_surfaces,
                                const PositionKey& key, Predictor& predictor,
                                const EncoderConfig& config);

// Model-free extraction over raw surfaces; bins only.
BitStream extract_bits_model_free(const std::vector<std::string>& marked_surfaces,
                                  const PositionKey& key, const EncoderConfig& config);
BitStream extract_model_free(const std::vector<std::string>& marked_surfaces,
                             const PositionKey& key, const EncoderConfig& config);

} // namespace rdht
