#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdht/distribution.hpp"
#include "rdht/token.hpp"

namespace rdht {

// One (context, token, count) record. Forward rows condition on the tokens
// immediately to the left (natural order); backward rows on the tokens to
// the right (nearest first). The empty context holds unigram counts.
struct CountRow {
    TokenIds context;
    TokenId token;
    std::uint32_t count;
};

// Bidirectional n-gram model with add-one smoothing. Immutable after
// construction and safe to share across concurrent readers.
class NGramModel {
public:
    NGramModel(Vocabulary vocab, int order,
               std::vector<CountRow> forward, std::vector<CountRow> backward);

    // Counts n-grams of every length up to order-1 over the given records.
    // The vocabulary keeps tokens with frequency >= min_count plus <oov>;
    // rarer tokens are counted under the <oov> bucket.
    static NGramModel build(const std::vector<std::string>& records,
                            int order, int min_count);

    const Vocabulary& vocabulary() const { return vocab_; }
    int order() const { return order_; }
    std::uint64_t total_tokens() const { return total_tokens_; }

    // Scores every vocabulary token for the masked slot: the geometric mean
    // of the smoothed forward and backward probabilities over the nearest
    // non-mask context on each side. A side whose context is empty (text
    // boundary or adjacent mask) drops out; with both sides empty the
    // smoothed unigram distribution is used. The <oov> bucket is never a
    // candidate. Result is canonicalized to at most top_k entries.
    Distribution predict(const MaskedText& text, std::size_t index,
                         std::size_t top_k = kDefaultTopK) const;

    std::uint32_t forward_count(const TokenIds& context, TokenId token) const;
    std::uint32_t backward_count(const TokenIds& context, TokenId token) const;

    void save(std::ostream& out) const;
    static NGramModel load(std::istream& in);
    void save_file(const std::string& path) const;
    static NGramModel load_file(const std::string& path);

private:
    struct ContextCounts {
        std::vector<std::pair<TokenId, std::uint32_t>> items; // sorted by id
        std::uint64_t total = 0;
    };
    using CountTable = std::unordered_map<std::string, ContextCounts>;

    static std::string pack_context(const TokenIds& context);
    static void insert_rows(CountTable& table, std::vector<CountRow>&& rows,
                            std::size_t vocab_size, int order);
    std::vector<CountRow> extract_rows(const CountTable& table) const;
    void rebuild_unigram_order();

    const ContextCounts* find_context(const CountTable& table, const TokenIds& ctx) const;
    TokenIds left_context(const MaskedText& text, std::size_t index) const;
    TokenIds right_context(const MaskedText& text, std::size_t index) const;

    Vocabulary vocab_;
    int order_;
    CountTable forward_;
    CountTable backward_;
    std::vector<std::pair<TokenId, std::uint32_t>> unigram_order_; // (id, count), count desc / id asc
    std::uint64_t total_tokens_ = 0;
};

} // namespace rdht
