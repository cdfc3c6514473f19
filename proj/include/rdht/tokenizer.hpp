#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rdht {

// True for the punctuation characters that are detached into their own tokens.
bool is_detached_punct(char c);

// Lowercases, splits on whitespace, and detaches each maximal run of
// punctuation characters (. , ! ? ; : ' ") as its own token. Lowercasing is
// ASCII-only; multi-byte UTF-8 sequences pass through untouched.
std::vector<std::string> tokenize(std::string_view text);

// Joins tokens with single spaces (the emit format for marked/cover text).
std::string join_tokens(const std::vector<std::string>& tokens);

} // namespace rdht
