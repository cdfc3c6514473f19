#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rdht/errors.hpp"

namespace rdht {

using TokenId = std::uint32_t;

// Reserved surface for the out-of-vocabulary bucket token.
inline constexpr std::string_view kOovSurface = "<oov>";
// Wire-protocol spelling of the mask sentinel. The sentinel is not a token;
// in-memory masked slots are represented as std::nullopt.
inline constexpr std::string_view kMaskSurface = "[MASK]";

// Dense surface <-> id mapping. Ids are assigned in insertion order and are
// stable for the lifetime of the vocabulary.
class Vocabulary {
public:
    Vocabulary() = default;

    // Adds a surface, returning its id. Existing surfaces keep their id.
    TokenId intern(std::string_view surface) {
        auto it = index_.find(std::string(surface));
        if (it != index_.end()) return it->second;
        TokenId id = static_cast<TokenId>(surfaces_.size());
        surfaces_.emplace_back(surface);
        index_.emplace(surfaces_.back(), id);
        return id;
    }

    std::optional<TokenId> lookup(std::string_view surface) const {
        auto it = index_.find(std::string(surface));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& surface(TokenId id) const {
        if (id >= surfaces_.size()) fail(ErrorKind::usage, "token id out of range");
        return surfaces_[id];
    }

    std::size_t size() const { return surfaces_.size(); }
    bool empty() const { return surfaces_.empty(); }

    // Id of the <oov> bucket, when this vocabulary carries one.
    std::optional<TokenId> oov_id() const { return lookup(kOovSurface); }

    const std::vector<std::string>& surfaces() const { return surfaces_; }

private:
    std::vector<std::string> surfaces_;
    std::unordered_map<std::string, TokenId> index_;
};

using TokenIds = std::vector<TokenId>;

// A text whose unfilled slots hold the mask sentinel (nullopt).
using MaskedText = std::vector<std::optional<TokenId>>;

} // namespace rdht
