#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rdht/bitstream.hpp"
#include "rdht/distribution.hpp"
#include "rdht/token.hpp"

namespace rdht {

enum class Strategy { block, huffman, adg, bins };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

struct EncoderConfig {
    Strategy strategy = Strategy::block;
    // Candidates must have probability strictly above the threshold to carry
    // bits (block / huffman / adg; ignored by bins).
    std::uint32_t tp_micros = 0;
    // Cap on bits per step for block and adg group counts.
    int max_block_bits = 8;
    // Number of payload bits per word for bins (vocabulary split into 2^r).
    int bins_bits = 1;
    // Prepended to the token surface when hashing for bins.
    std::vector<std::uint8_t> salt;
};

std::uint32_t tp_to_micros(double tp);

struct StepResult {
    TokenId token;
    Bits bits;            // exact bit prefix carried by the token
    bool degraded = false; // bins had to fall outside the candidate list
};

// FNV-1a 64-bit over salt bytes followed by the token surface bytes. This is
// the normative hash for bins subsets.
std::uint64_t fnv1a64(const std::vector<std::uint8_t>& salt, std::string_view surface);

// Subset index of a surface for bins with 2^r subsets.
std::uint32_t bins_subset(const std::vector<std::uint8_t>& salt, std::string_view surface, int r);

// Entries of dist with probability strictly above the threshold. dist is
// canonical, so these are a prefix of its entries.
std::size_t usable_count(const Distribution& dist, std::uint32_t tp_micros);

struct HuffmanCodeword {
    TokenId token;
    std::uint64_t code; // numeric value of the codeword, length bits wide
    std::uint8_t length;
};

// Canonical Huffman code over the usable entries of dist (requires >= 2).
// Merge rule: lowest mass first, ties by smallest minimum token id; codewords
// reassigned canonically by (length asc, probability desc, id asc).
// Verifies prefix-freeness and the Kraft equality on every build.
std::vector<HuffmanCodeword> huffman_code_for(const Distribution& dist,
                                              const EncoderConfig& config);

// Greedy balanced grouping of the usable entries into 2^g groups; returns
// per-group entry indexes into dist. Verifies the partition law on every
// build: groups disjoint, covering, masses within one max entry.
std::vector<std::vector<std::size_t>> adg_groups_for(const Distribution& dist,
                                                     const EncoderConfig& config);

// Picks the token carrying the next bits of the stream. dist must be
// canonical and non-empty; vocab backs the bins fallback scan.
StepResult encode_step(const EncoderConfig& config, const Distribution& dist,
                       BitSource& stream, const Vocabulary& vocab);

// Recovers the exact bit prefix carried by an observed token. For bins the
// distribution is ignored (pass an empty one) and no model is needed.
Bits decode_step(const EncoderConfig& config, const Distribution& dist,
                 TokenId observed, const Vocabulary& vocab);

struct BinsPartitionReport {
    std::vector<std::size_t> subset_sizes; // indexed by subset
};

// Checks that every one of the 2^r subsets is populated by the vocabulary
// (the <oov> bucket does not count). Throws "uncoverable subset" otherwise.
BinsPartitionReport validate_bins_partition(const Vocabulary& vocab, int r,
                                            const std::vector<std::uint8_t>& salt);

} // namespace rdht
