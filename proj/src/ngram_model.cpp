#include "rdht/ngram_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "rdht/tokenizer.hpp"

namespace rdht {

namespace {

constexpr char kMagic[4] = {'R', 'D', 'H', 'M'};
constexpr std::uint16_t kModelVersion = 1;

void put_u8(std::ostream& out, std::uint8_t v) {
    out.put(static_cast<char>(v));
}

void put_u16(std::ostream& out, std::uint16_t v) {
    put_u8(out, static_cast<std::uint8_t>(v >> 8));
    put_u8(out, static_cast<std::uint8_t>(v));
}

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) put_u8(out, static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) put_u8(out, static_cast<std::uint8_t>(v >> (8 * i)));
}

[[noreturn]] void corrupt() { fail(ErrorKind::io, "corrupt model"); }

std::uint8_t get_u8(std::istream& in) {
    int c = in.get();
    if (c == EOF) corrupt();
    return static_cast<std::uint8_t>(c);
}

std::uint16_t get_u16(std::istream& in) {
    std::uint16_t v = get_u8(in);
    return static_cast<std::uint16_t>((v << 8) | get_u8(in));
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | get_u8(in);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | get_u8(in);
    return v;
}

bool row_less(const CountRow& a, const CountRow& b) {
    if (a.context != b.context) {
        return std::lexicographical_compare(a.context.begin(), a.context.end(),
                                            b.context.begin(), b.context.end());
    }
    return a.token < b.token;
}

} // namespace

std::string NGramModel::pack_context(const TokenIds& context) {
    std::string key;
    key.reserve(context.size() * 4);
    for (TokenId id : context) {
        key.push_back(static_cast<char>(id >> 24));
        key.push_back(static_cast<char>(id >> 16));
        key.push_back(static_cast<char>(id >> 8));
        key.push_back(static_cast<char>(id));
    }
    return key;
}

void NGramModel::insert_rows(CountTable& table, std::vector<CountRow>&& rows,
                             std::size_t vocab_size, int order) {
    for (CountRow& row : rows) {
        if (row.context.size() > static_cast<std::size_t>(order - 1)) corrupt();
        if (row.token >= vocab_size) corrupt();
        for (TokenId id : row.context) {
            if (id >= vocab_size) corrupt();
        }
        ContextCounts& ctx = table[pack_context(row.context)];
        ctx.items.emplace_back(row.token, row.count);
        ctx.total += row.count;
    }
    for (auto& [key, ctx] : table) {
        std::sort(ctx.items.begin(), ctx.items.end());
        for (std::size_t i = 1; i < ctx.items.size(); ++i) {
            if (ctx.items[i].first == ctx.items[i - 1].first) corrupt();
        }
    }
}

NGramModel::NGramModel(Vocabulary vocab, int order,
                       std::vector<CountRow> forward, std::vector<CountRow> backward)
    : vocab_(std::move(vocab)), order_(order) {
    if (order_ < 2) fail(ErrorKind::usage, "order must be at least 2");
    if (order_ > 255) fail(ErrorKind::usage, "order exceeds the model format limit");
    insert_rows(forward_, std::move(forward), vocab_.size(), order_);
    insert_rows(backward_, std::move(backward), vocab_.size(), order_);
    if (auto it = forward_.find(std::string()); it != forward_.end()) {
        total_tokens_ = it->second.total;
    }
    rebuild_unigram_order();
}

void NGramModel::rebuild_unigram_order() {
    const ContextCounts* uni = find_context(forward_, TokenIds{});
    std::vector<std::uint32_t> counts(vocab_.size(), 0);
    if (uni != nullptr) {
        for (const auto& [id, count] : uni->items) counts[id] = count;
    }
    auto oov = vocab_.oov_id();
    unigram_order_.clear();
    unigram_order_.reserve(vocab_.size());
    for (TokenId id = 0; id < vocab_.size(); ++id) {
        if (oov && *oov == id) continue;
        unigram_order_.emplace_back(id, counts[id]);
    }
    std::sort(unigram_order_.begin(), unigram_order_.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
}

NGramModel NGramModel::build(const std::vector<std::string>& records,
                             int order, int min_count) {
    if (order < 2) fail(ErrorKind::usage, "order must be at least 2");
    if (min_count < 1) fail(ErrorKind::usage, "min_count must be at least 1");
    if (records.empty()) fail(ErrorKind::usage, "empty corpus");

    std::vector<std::vector<std::string>> lines;
    lines.reserve(records.size());
    std::size_t token_total = 0;
    for (const std::string& record : records) {
        std::vector<std::string> toks = tokenize(record);
        token_total += toks.size();
        if (!toks.empty()) lines.push_back(std::move(toks));
    }
    if (token_total == 0) fail(ErrorKind::usage, "empty corpus");

    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto& line : lines) {
        for (const std::string& tok : line) ++freq[tok];
    }

    std::vector<std::pair<std::string, std::uint64_t>> qualifying;
    qualifying.reserve(freq.size());
    for (const auto& [surface, count] : freq) {
        if (count >= static_cast<std::uint64_t>(min_count)) {
            qualifying.emplace_back(surface, count);
        }
    }
    std::sort(qualifying.begin(), qualifying.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    for (const auto& [surface, count] : qualifying) vocab.intern(surface);
    vocab.intern(kOovSurface);
    if (vocab.size() < 2) fail(ErrorKind::usage, "degenerate vocabulary");
    const TokenId oov = *vocab.oov_id();

    // Count every context length up to order-1 in both directions; windows
    // never cross record boundaries.
    std::map<std::pair<std::string, TokenId>, std::uint32_t> fwd_counts;
    std::map<std::pair<std::string, TokenId>, std::uint32_t> bwd_counts;
    TokenIds scratch;
    for (const auto& line : lines) {
        TokenIds ids;
        ids.reserve(line.size());
        for (const std::string& tok : line) {
            auto id = vocab.lookup(tok);
            ids.push_back(id ? *id : oov);
        }
        const std::size_t n = ids.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (int len = 0; len < order; ++len) {
                const auto off = static_cast<std::size_t>(len);
                if (i >= off) {
                    scratch.assign(ids.begin() + static_cast<std::ptrdiff_t>(i - off),
                                   ids.begin() + static_cast<std::ptrdiff_t>(i));
                    ++fwd_counts[{pack_context(scratch), ids[i]}];
                }
                if (i + off < n) {
                    scratch.clear();
                    for (std::size_t j = i + 1; j <= i + off; ++j) scratch.push_back(ids[j]);
                    ++bwd_counts[{pack_context(scratch), ids[i]}];
                }
            }
        }
    }

    auto to_rows = [](const std::map<std::pair<std::string, TokenId>, std::uint32_t>& counts) {
        std::vector<CountRow> rows;
        rows.reserve(counts.size());
        for (const auto& [key, count] : counts) {
            CountRow row;
            const std::string& packed = key.first;
            for (std::size_t i = 0; i + 3 < packed.size(); i += 4) {
                std::uint32_t id = (static_cast<std::uint32_t>(static_cast<std::uint8_t>(packed[i])) << 24) |
                                   (static_cast<std::uint32_t>(static_cast<std::uint8_t>(packed[i + 1])) << 16) |
                                   (static_cast<std::uint32_t>(static_cast<std::uint8_t>(packed[i + 2])) << 8) |
                                   static_cast<std::uint32_t>(static_cast<std::uint8_t>(packed[i + 3]));
                row.context.push_back(id);
            }
            row.token = key.second;
            row.count = count;
            rows.push_back(std::move(row));
        }
        return rows;
    };

    return NGramModel(std::move(vocab), order, to_rows(fwd_counts), to_rows(bwd_counts));
}

const NGramModel::ContextCounts* NGramModel::find_context(const CountTable& table,
                                                          const TokenIds& ctx) const {
    auto it = table.find(pack_context(ctx));
    if (it == table.end()) return nullptr;
    return &it->second;
}

TokenIds NGramModel::left_context(const MaskedText& text, std::size_t index) const {
    TokenIds ctx;
    const auto max_len = static_cast<std::size_t>(order_ - 1);
    std::size_t i = index;
    while (i > 0 && ctx.size() < max_len && text[i - 1].has_value()) {
        ctx.push_back(*text[i - 1]);
        --i;
    }
    std::reverse(ctx.begin(), ctx.end()); // natural reading order
    return ctx;
}

TokenIds NGramModel::right_context(const MaskedText& text, std::size_t index) const {
    TokenIds ctx;
    const auto max_len = static_cast<std::size_t>(order_ - 1);
    std::size_t i = index + 1;
    while (i < text.size() && ctx.size() < max_len && text[i].has_value()) {
        ctx.push_back(*text[i]); // nearest first
        ++i;
    }
    return ctx;
}

Distribution NGramModel::predict(const MaskedText& text, std::size_t index,
                                 std::size_t top_k) const {
    if (index >= text.size() || text[index].has_value()) {
        fail(ErrorKind::usage, "not a masked slot");
    }

    const auto oov = vocab_.oov_id();
    auto is_oov = [&](TokenId id) { return oov && *oov == id; };

    const TokenIds left = left_context(text, index);
    const TokenIds right = right_context(text, index);

    // Relative weights: constant smoothing denominators cancel under
    // canonicalization, so only the (count + 1) numerators matter. Tokens
    // outside the sparse lists share the baseline weight 1.
    std::vector<ScoredToken> scored;
    scored.reserve(top_k + 8);
    std::vector<TokenId> claimed; // union members, sorted by id

    if (left.empty() && right.empty()) {
        for (const auto& [id, count] : unigram_order_) {
            if (scored.size() >= top_k) break;
            scored.push_back({id, static_cast<double>(count) + 1.0});
        }
        return canonicalize(std::move(scored), top_k);
    }

    if (!left.empty() && !right.empty()) {
        const ContextCounts* cf = find_context(forward_, left);
        const ContextCounts* cb = find_context(backward_, right);
        static const ContextCounts kEmpty{};
        const auto& fitems = (cf ? *cf : kEmpty).items;
        const auto& bitems = (cb ? *cb : kEmpty).items;
        std::size_t a = 0;
        std::size_t b = 0;
        while (a < fitems.size() || b < bitems.size()) {
            TokenId id;
            std::uint64_t f = 0;
            std::uint64_t g = 0;
            if (b >= bitems.size() || (a < fitems.size() && fitems[a].first < bitems[b].first)) {
                id = fitems[a].first;
                f = fitems[a].second;
                ++a;
            } else if (a >= fitems.size() || bitems[b].first < fitems[a].first) {
                id = bitems[b].first;
                g = bitems[b].second;
                ++b;
            } else {
                id = fitems[a].first;
                f = fitems[a].second;
                g = bitems[b].second;
                ++a;
                ++b;
            }
            if (is_oov(id)) continue;
            claimed.push_back(id);
            scored.push_back({id, std::sqrt(static_cast<double>((f + 1) * (g + 1)))});
        }
    } else {
        const ContextCounts* single = left.empty() ? find_context(backward_, right)
                                                   : find_context(forward_, left);
        if (single != nullptr) {
            for (const auto& [id, count] : single->items) {
                if (is_oov(id)) continue;
                claimed.push_back(id);
                scored.push_back({id, static_cast<double>(count) + 1.0});
            }
        }
    }

    // Union members all score strictly above the baseline, so the global
    // top_k is the best of the union plus lowest-id baseline fillers.
    std::sort(scored.begin(), scored.end(), [](const ScoredToken& a, const ScoredToken& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.token < b.token;
    });
    if (scored.size() > top_k) {
        scored.resize(top_k);
    } else if (scored.size() < top_k) {
        std::size_t next_claimed = 0;
        for (TokenId id = 0; id < vocab_.size() && scored.size() < top_k; ++id) {
            while (next_claimed < claimed.size() && claimed[next_claimed] < id) ++next_claimed;
            if (next_claimed < claimed.size() && claimed[next_claimed] == id) continue;
            if (is_oov(id)) continue;
            scored.push_back({id, 1.0});
        }
    }
    return canonicalize(std::move(scored), top_k);
}

std::uint32_t NGramModel::forward_count(const TokenIds& context, TokenId token) const {
    const ContextCounts* ctx = find_context(forward_, context);
    if (ctx == nullptr) return 0;
    auto it = std::lower_bound(ctx->items.begin(), ctx->items.end(),
                               std::make_pair(token, std::uint32_t{0}));
    if (it == ctx->items.end() || it->first != token) return 0;
    return it->second;
}

std::uint32_t NGramModel::backward_count(const TokenIds& context, TokenId token) const {
    const ContextCounts* ctx = find_context(backward_, context);
    if (ctx == nullptr) return 0;
    auto it = std::lower_bound(ctx->items.begin(), ctx->items.end(),
                               std::make_pair(token, std::uint32_t{0}));
    if (it == ctx->items.end() || it->first != token) return 0;
    return it->second;
}

std::vector<CountRow> NGramModel::extract_rows(const CountTable& table) const {
    std::vector<CountRow> rows;
    for (const auto& [key, ctx] : table) {
        CountRow base;
        for (std::size_t i = 0; i + 3 < key.size(); i += 4) {
            std::uint32_t id = (static_cast<std::uint32_t>(static_cast<std::uint8_t>(key[i])) << 24) |
                               (static_cast<std::uint32_t>(static_cast<std::uint8_t>(key[i + 1])) << 16) |
                               (static_cast<std::uint32_t>(static_cast<std::uint8_t>(key[i + 2])) << 8) |
                               static_cast<std::uint32_t>(static_cast<std::uint8_t>(key[i + 3]));
            base.context.push_back(id);
        }
        for (const auto& [token, count] : ctx.items) {
            rows.push_back({base.context, token, count});
        }
    }
    std::sort(rows.begin(), rows.end(), row_less);
    return rows;
}

void NGramModel::save(std::ostream& out) const {
    out.write(kMagic, 4);
    put_u16(out, kModelVersion);
    put_u8(out, static_cast<std::uint8_t>(order_));
    put_u32(out, static_cast<std::uint32_t>(vocab_.size()));
    for (const std::string& surface : vocab_.surfaces()) {
        put_u32(out, static_cast<std::uint32_t>(surface.size()));
        out.write(surface.data(), static_cast<std::streamsize>(surface.size()));
    }
    for (const CountTable* table : {&forward_, &backward_}) {
        std::vector<CountRow> rows = extract_rows(*table);
        put_u64(out, rows.size());
        for (const CountRow& row : rows) {
            put_u8(out, static_cast<std::uint8_t>(row.context.size()));
            for (TokenId id : row.context) put_u32(out, id);
            put_u32(out, row.token);
            put_u32(out, row.count);
        }
    }
    if (!out) fail(ErrorKind::io, "model write failed");
}

NGramModel NGramModel::load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) corrupt();
    std::uint16_t version = get_u16(in);
    if (version != kModelVersion) fail(ErrorKind::io, "unsupported model version");
    int order = get_u8(in);
    if (order < 2) corrupt();

    std::uint32_t vocab_count = get_u32(in);
    if (vocab_count < 2) corrupt();
    Vocabulary vocab;
    for (std::uint32_t i = 0; i < vocab_count; ++i) {
        std::uint32_t len = get_u32(in);
        if (len > (1u << 20)) corrupt();
        std::string surface(len, '\0');
        in.read(surface.data(), static_cast<std::streamsize>(len));
        if (in.gcount() != static_cast<std::streamsize>(len)) corrupt();
        if (vocab.intern(surface) != i) corrupt(); // duplicate surface
    }

    auto read_rows = [&]() {
        std::uint64_t count = get_u64(in);
        std::vector<CountRow> rows;
        rows.reserve(static_cast<std::size_t>(count));
        for (std::uint64_t i = 0; i < count; ++i) {
            CountRow row;
            std::uint8_t len = get_u8(in);
            for (std::uint8_t j = 0; j < len; ++j) row.context.push_back(get_u32(in));
            row.token = get_u32(in);
            row.count = get_u32(in);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    std::vector<CountRow> fwd = read_rows();
    std::vector<CountRow> bwd = read_rows();
    if (in.peek() != EOF) corrupt();
    return NGramModel(std::move(vocab), order, std::move(fwd), std::move(bwd));
}

void NGramModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot open model file for writing: " + path);
    save(out);
}

NGramModel NGramModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open model file: " + path);
    return load(in);
}

} // namespace rdht
