#include "rdht/coders.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <tuple>

namespace rdht {

namespace {

int floor_log2(std::size_t v) {
    int k = -1;
    while (v > 0) {
        v >>= 1;
        ++k;
    }
    return k;
}

std::uint64_t bits_value(const Bits& bits) {
    std::uint64_t v = 0;
    for (std::uint8_t b : bits) v = (v << 1) | b;
    return v;
}

Bits value_bits(std::uint64_t value, int width) {
    Bits out;
    out.reserve(static_cast<std::size_t>(width));
    for (int i = width - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
    }
    return out;
}

void check_bins_bits(const EncoderConfig& config) {
    if (config.bins_bits < 1 || config.bins_bits > 20) {
        fail(ErrorKind::usage, "bins_bits out of range [1, 20]");
    }
}

[[noreturn]] void inconsistent() {
    fail(ErrorKind::inconsistency, "inconsistent marked text");
}

} // namespace

const char* strategy_name(Strategy s) {
    switch (s) {
    case Strategy::block: return "block";
    case Strategy::huffman: return "huffman";
    case Strategy::adg: return "adg";
    case Strategy::bins: return "bins";
    }
    return "?";
}

Strategy strategy_from_name(std::string_view name) {
    if (name == "block") return Strategy::block;
    if (name == "huffman") return Strategy::huffman;
    if (name == "adg") return Strategy::adg;
    if (name == "bins") return Strategy::bins;
    fail(ErrorKind::usage, "unknown strategy: " + std::string(name));
}

std::uint32_t tp_to_micros(double tp) {
    if (!(tp >= 0.0) || tp >= 1.0) fail(ErrorKind::usage, "tp must be in [0, 1)");
    return static_cast<std::uint32_t>(std::llround(tp * kProbOne));
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& salt, std::string_view surface) {
    std::uint64_t h = 14695981039346656037ull;
    constexpr std::uint64_t prime = 1099511628211ull;
    for (std::uint8_t b : salt) {
        h ^= b;
        h *= prime;
    }
    for (char c : surface) {
        h ^= static_cast<std::uint8_t>(c);
        h *= prime;
    }
    return h;
}

std::uint32_t bins_subset(const std::vector<std::uint8_t>& salt, std::string_view surface, int r) {
    return static_cast<std::uint32_t>(fnv1a64(salt, surface) & ((1ull << r) - 1));
}

std::size_t usable_count(const Distribution& dist, std::uint32_t tp_micros) {
    std::size_t u = 0;
    while (u < dist.entries.size() && dist.entries[u].micros > tp_micros) ++u;
    return u;
}

std::vector<HuffmanCodeword> huffman_code_for(const Distribution& dist,
                                              const EncoderConfig& config) {
    const std::size_t u = usable_count(dist, config.tp_micros);
    if (u < 2) fail(ErrorKind::usage, "huffman code needs at least two usable entries");

    struct Node {
        std::uint64_t mass;
        TokenId min_id;
        int left = -1;
        int right = -1;
        std::size_t entry = 0; // valid for leaves
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * u);
    using QItem = std::tuple<std::uint64_t, TokenId, int>; // (mass, min id, node)
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
    for (std::size_t i = 0; i < u; ++i) {
        const DistEntry& e = dist.entries[i];
        nodes.push_back({e.micros, e.token, -1, -1, i});
        queue.emplace(e.micros, e.token, static_cast<int>(i));
    }
    while (queue.size() > 1) {
        auto [am, aid, a] = queue.top();
        queue.pop();
        auto [bm, bid, b] = queue.top();
        queue.pop();
        nodes.push_back({am + bm, std::min(aid, bid), a, b, 0});
        queue.emplace(am + bm, std::min(aid, bid), static_cast<int>(nodes.size() - 1));
    }

    std::vector<std::uint8_t> lengths(u, 0);
    // Iterative depth walk from the root.
    std::vector<std::pair<int, std::uint8_t>> stack{{std::get<2>(queue.top()), 0}};
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& node = nodes[static_cast<std::size_t>(idx)];
        if (node.left < 0) {
            lengths[node.entry] = depth;
        } else {
            stack.emplace_back(node.left, static_cast<std::uint8_t>(depth + 1));
            stack.emplace_back(node.right, static_cast<std::uint8_t>(depth + 1));
        }
    }

    // Canonical reassignment: entry order already ranks by (probability
    // descending, id ascending), so sorting by length with a stable tie on
    // entry index gives the assignment order.
    std::vector<std::size_t> order(u);
    for (std::size_t i = 0; i < u; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (lengths[a] != lengths[b]) return lengths[a] < lengths[b];
        return a < b;
    });

    std::vector<HuffmanCodeword> code(u);
    std::uint64_t next = 0;
    std::uint8_t prev_len = lengths[order[0]];
    for (std::size_t i = 0; i < u; ++i) {
        std::size_t entry = order[i];
        std::uint8_t len = lengths[entry];
        if (i > 0) next = (next + 1) << (len - prev_len);
        code[entry] = {dist.entries[entry].token, next, len};
        prev_len = len;
    }

    // Kraft equality: the tree is full, so lengths must tile the code space.
    std::uint8_t max_len = 0;
    for (std::size_t i = 0; i < u; ++i) max_len = std::max(max_len, lengths[i]);
    std::uint64_t kraft = 0;
    for (std::size_t i = 0; i < u; ++i) kraft += 1ull << (max_len - lengths[i]);
    if (max_len == 0 || max_len > 63 || kraft != (1ull << max_len)) {
        fail(ErrorKind::usage, "huffman code violates the Kraft equality");
    }

    // Prefix-freeness: in left-aligned lexicographic order any prefix
    // relation shows up between neighbours.
    std::vector<std::size_t> lex(order);
    std::sort(lex.begin(), lex.end(), [&](std::size_t a, std::size_t b) {
        std::uint64_t av = code[a].code << (max_len - code[a].length);
        std::uint64_t bv = code[b].code << (max_len - code[b].length);
        if (av != bv) return av < bv;
        return code[a].length < code[b].length;
    });
    for (std::size_t i = 1; i < u; ++i) {
        const HuffmanCodeword& p = code[lex[i - 1]];
        const HuffmanCodeword& q = code[lex[i]];
        if (p.length <= q.length && (q.code >> (q.length - p.length)) == p.code) {
            fail(ErrorKind::usage, "huffman code not prefix-free");
        }
    }
    return code;
}

std::vector<std::vector<std::size_t>> adg_groups_for(const Distribution& dist,
                                                     const EncoderConfig& config) {
    const std::size_t u = usable_count(dist, config.tp_micros);
    if (u < 2) fail(ErrorKind::usage, "adg grouping needs at least two usable entries");
    const int g = std::min(floor_log2(u), config.max_block_bits);
    const std::size_t group_count = std::size_t{1} << g;

    std::vector<std::vector<std::size_t>> groups(group_count);
    std::vector<std::uint64_t> mass(group_count, 0);
    for (std::size_t e = 0; e < u; ++e) {
        std::size_t target = 0;
        for (std::size_t j = 1; j < group_count; ++j) {
            if (mass[j] < mass[target]) target = j;
        }
        groups[target].push_back(e);
        mass[target] += dist.entries[e].micros;
    }

    // Partition law: disjoint cover with masses within one max entry.
    std::size_t assigned = 0;
    std::uint64_t max_mass = 0;
    std::uint64_t min_mass = ~0ull;
    for (std::size_t j = 0; j < group_count; ++j) {
        if (groups[j].empty()) fail(ErrorKind::usage, "adg produced an empty group");
        assigned += groups[j].size();
        max_mass = std::max(max_mass, mass[j]);
        min_mass = std::min(min_mass, mass[j]);
    }
    std::uint64_t max_entry = 0;
    for (std::size_t e = 0; e < u; ++e) {
        max_entry = std::max<std::uint64_t>(max_entry, dist.entries[e].micros);
    }
    if (assigned != u || max_mass - min_mass > max_entry) {
        fail(ErrorKind::usage, "adg grouping violates the partition law");
    }
    return groups;
}

StepResult encode_step(const EncoderConfig& config, const Distribution& dist,
                       BitSource& stream, const Vocabulary& vocab) {
    if (dist.empty()) fail(ErrorKind::usage, "empty distribution");

    switch (config.strategy) {
    case Strategy::block: {
        const std::size_t u = usable_count(dist, config.tp_micros);
        if (u <= 1) return {dist.top().token, {}, false};
        const int k = std::min(floor_log2(u), config.max_block_bits);
        Bits bits = stream.read(static_cast<std::size_t>(k));
        const auto index = static_cast<std::size_t>(bits_value(bits));
        return {dist.entries[index].token, std::move(bits), false};
    }
    case Strategy::huffman: {
        const std::size_t u = usable_count(dist, config.tp_micros);
        if (u <= 1) return {dist.top().token, {}, false};
        std::vector<HuffmanCodeword> code = huffman_code_for(dist, config);
        Bits bits;
        std::uint64_t acc = 0;
        while (true) {
            Bits one = stream.read(1);
            acc = (acc << 1) | one[0];
            bits.push_back(one[0]);
            for (const HuffmanCodeword& cw : code) {
                if (cw.length == static_cast<std::uint8_t>(bits.size()) &&
                    bits.size() <= 63 && cw.code == acc) {
                    return {cw.token, std::move(bits), false};
                }
            }
            if (bits.size() > 63) fail(ErrorKind::usage, "huffman walk ran off the code");
        }
    }
    case Strategy::adg: {
        const std::size_t u = usable_count(dist, config.tp_micros);
        if (u <= 1) return {dist.top().token, {}, false};
        std::vector<std::vector<std::size_t>> groups = adg_groups_for(dist, config);
        const int g = floor_log2(groups.size());
        Bits bits = stream.read(static_cast<std::size_t>(g));
        const auto index = static_cast<std::size_t>(bits_value(bits));
        // Entries joined each group in canonical order, so the first one is
        // the group's highest-probability token.
        return {dist.entries[groups[index][0]].token, std::move(bits), false};
    }
    case Strategy::bins: {
        check_bins_bits(config);
        const int r = config.bins_bits;
        Bits bits = stream.read(static_cast<std::size_t>(r));
        const auto wanted = static_cast<std::uint32_t>(bits_value(bits));
        for (const DistEntry& e : dist.entries) {
            if (bins_subset(config.salt, vocab.surface(e.token), r) == wanted) {
                return {e.token, std::move(bits), false};
            }
        }
        // Candidate list missed the subset: fall back to the lowest-id
        // vocabulary token of that subset so the slot still carries r bits.
        const auto oov = vocab.oov_id();
        for (TokenId id = 0; id < vocab.size(); ++id) {
            if (oov && *oov == id) continue;
            if (bins_subset(config.salt, vocab.surface(id), r) == wanted) {
                return {id, std::move(bits), true};
            }
        }
        fail(ErrorKind::usage, "uncoverable subset: increase vocabulary or reduce r");
    }
    }
    fail(ErrorKind::usage, "unknown strategy");
}

Bits decode_step(const EncoderConfig& config, const Distribution& dist,
                 TokenId observed, const Vocabulary& vocab) {
    switch (config.strategy) {
    case Strategy::block: {
        if (dist.empty()) fail(ErrorKind::usage, "empty distribution");
        const std::size_t u = usable_count(dist, config.tp_micros);
        if (u <= 1) {
            if (observed != dist.top().token) inconsistent();
            return {};
        }
        const int k = std::min(floor_log2(u), config.max_block_bits);
        const std::size_t reachable = std::size_t{1} << k;
        for (std::size_t i = 0; i < reachable; ++i) {
            if (dist.entries[i].token == observed) {
                return value_bits(i, k);
            }
        }
        inconsistent();
    }
    case Strategy::huffman: {
        if (dist.empty()) fail(ErrorKind::usage, "empty distribution");
        const std::size_t u = usable_count(dist, config.tp_micros);
        if (u <= 1) {
            if (observed != dist.top().token) inconsistent();
            return {};
        }
        std::vector<HuffmanCodeword> code = huffman_code_for(dist, config);
        for (const HuffmanCodeword& cw : code) {
            if (cw.token == observed) {
                return value_bits(cw.code, cw.length);
            }
        }
        inconsistent();
    }
    case Strategy::adg: {
        if (dist.empty()) fail(ErrorKind::usage, "empty distribution");
        const std::size_t u = usable_count(dist, config.tp_micros);
        if (u <= 1) {
            if (observed != dist.top().token) inconsistent();
            return {};
        }
        std::vector<std::vector<std::size_t>> groups = adg_groups_for(dist, config);
        const int g = floor_log2(groups.size());
        for (std::size_t j = 0; j < groups.size(); ++j) {
            for (std::size_t e : groups[j]) {
                if (dist.entries[e].token == observed) {
                    return value_bits(j, g);
                }
            }
        }
        inconsistent();
    }
    case Strategy::bins: {
        check_bins_bits(config);
        return value_bits(bins_subset(config.salt, vocab.surface(observed), config.bins_bits),
                          config.bins_bits);
    }
    }
    fail(ErrorKind::usage, "unknown strategy");
}

BinsPartitionReport validate_bins_partition(const Vocabulary& vocab, int r,
                                            const std::vector<std::uint8_t>& salt) {
    EncoderConfig probe;
    probe.bins_bits = r;
    check_bins_bits(probe);
    BinsPartitionReport report;
    report.subset_sizes.assign(std::size_t{1} << r, 0);
    const auto oov = vocab.oov_id();
    for (TokenId id = 0; id < vocab.size(); ++id) {
        if (oov && *oov == id) continue;
        ++report.subset_sizes[bins_subset(salt, vocab.surface(id), r)];
    }
    for (std::size_t size : report.subset_sizes) {
        if (size == 0) {
            fail(ErrorKind::usage, "uncoverable subset: increase vocabulary or reduce r");
        }
    }
    return report;
}

} // namespace rdht
