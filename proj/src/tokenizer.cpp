#include "rdht/tokenizer.hpp"

#include <cctype>

namespace rdht {

bool is_detached_punct(char c) {
    switch (c) {
    case '.': case ',': case '!': case '?':
    case ';': case ':': case '\'': case '"':
        return true;
    default:
        return false;
    }
}

static bool is_space(unsigned char c) {
    return std::isspace(c) != 0;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        // One whitespace-delimited word, split into alternating
        // punctuation / non-punctuation runs.
        std::size_t start = i;
        while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::string_view word = text.substr(start, i - start);
        std::size_t j = 0;
        while (j < word.size()) {
            bool punct = is_detached_punct(word[j]);
            std::size_t k = j + 1;
            while (k < word.size() && is_detached_punct(word[k]) == punct) ++k;
            std::string run(word.substr(j, k - j));
            if (!punct) {
                for (char& c : run) {
                    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                }
            }
            out.push_back(std::move(run));
            j = k;
        }
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

} // namespace rdht
