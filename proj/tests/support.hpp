#pragma once

// Shared fixtures for the test binaries: a deterministic synthetic corpus,
// tiny hand-built models, independent oracles, and temp-file plumbing.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "rdht/distribution.hpp"
#include "rdht/ngram_model.hpp"
#include "rdht/token.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Synthetic corpus. Sentences are assembled from fixed word pools with a
// squared-uniform pick that skews frequencies, giving the n-gram model the
// kind of spread real text has. Fully deterministic for a given seed.

inline const std::vector<std::string>& nouns() {
    static const std::vector<std::string> base = {
        "man", "woman", "child", "dog", "cat", "house", "door", "road", "river", "tree",
        "bird", "stone", "fire", "light", "night", "morning", "car", "train", "boat", "city",
        "village", "garden", "window", "table", "chair", "letter", "book", "story", "song", "voice",
        "hand", "face", "eye", "heart", "mind", "dream", "friend", "brother", "sister", "mother",
        "father", "teacher", "doctor", "soldier", "king", "queen", "farmer", "sailor", "writer", "painter",
        "mountain", "valley", "field", "forest", "island", "bridge", "tower", "castle", "market", "street",
        "winter", "summer", "spring", "autumn", "rain", "snow", "wind", "storm", "cloud", "sun",
        "moon", "star", "sky", "sea", "wave", "shore", "path", "journey", "secret", "promise",
    };
    static const std::vector<std::string> all = [] {
        std::vector<std::string> out = base;
        for (const std::string& w : base) out.push_back(w + "s");
        return out;
    }();
    return all;
}

inline const std::vector<std::string>& verbs() {
    static const std::vector<std::string> v = {
        "saw", "found", "took", "gave", "made", "kept", "left", "held", "told", "asked",
        "watched", "followed", "carried", "opened", "closed", "reached", "crossed", "climbed", "built", "broke",
        "wrote", "read", "sang", "heard", "felt", "knew", "thought", "remembered", "forgot", "wanted",
        "loved", "feared", "trusted", "helped", "called", "answered", "waited", "walked", "ran", "stood",
        "sat", "slept", "woke", "smiled", "laughed", "cried", "whispered", "shouted", "promised", "believed",
    };
    return v;
}

inline const std::vector<std::string>& adjectives() {
    static const std::vector<std::string> v = {
        "old", "young", "small", "great", "quiet", "loud", "dark", "bright", "cold", "warm",
        "long", "short", "deep", "high", "low", "strange", "familiar", "gentle", "fierce", "tired",
        "happy", "sad", "angry", "calm", "brave", "careful", "curious", "patient", "proud", "humble",
        "golden", "silver", "green", "blue", "red", "white", "black", "grey", "distant", "near",
    };
    return v;
}

inline const std::vector<std::string>& adverbs() {
    static const std::vector<std::string> v = {
        "slowly", "quickly", "quietly", "loudly", "gently", "suddenly", "finally", "nearly", "almost", "often",
        "always", "never", "sometimes", "rarely", "soon", "late", "early", "again", "together", "alone",
        "carefully", "eagerly", "sadly", "happily", "bravely", "calmly", "proudly", "softly", "deeply", "truly",
    };
    return v;
}

inline const std::vector<std::string>& determiners() {
    static const std::vector<std::string> v = {
        "the", "a", "his", "her", "their", "this", "that", "my", "our", "its",
    };
    return v;
}

inline const std::vector<std::string>& pronouns() {
    static const std::vector<std::string> v = {
        "he", "she", "they", "we", "i", "you", "it", "everyone",
    };
    return v;
}

inline const std::vector<std::string>& connectors() {
    static const std::vector<std::string> v = {
        "and", "but", "because", "while", "when", "before", "after", "until", "although", "so",
        "if", "then",
    };
    return v;
}

inline const std::vector<std::string>& prepositions() {
    static const std::vector<std::string> v = {
        "in", "on", "under", "over", "near", "beyond", "through", "toward",
    };
    return v;
}

inline const std::vector<std::string>& places() {
    static const std::vector<std::string> v = {
        "north", "south", "east", "west", "home", "town", "harbor", "station", "church", "school",
        "library", "kitchen", "cellar", "attic", "yard", "meadow", "orchard", "mill", "farm", "inn",
        "square", "alley", "dock", "camp", "cave", "cliff", "pond", "creek", "grove", "plain",
    };
    return v;
}

class CorpusGen {
public:
    explicit CorpusGen(std::uint64_t seed) : rng_(seed) {}

    std::string pick(const std::vector<std::string>& pool) {
        // Squared uniform skews toward the front of the pool.
        double u = static_cast<double>(rng_() % 100000) / 100000.0;
        auto idx = static_cast<std::size_t>(u * u * static_cast<double>(pool.size()));
        if (idx >= pool.size()) idx = pool.size() - 1;
        return pool[idx];
    }

    bool chance(unsigned percent) { return rng_() % 100 < percent; }

    std::string noun_phrase() {
        std::string out = pick(determiners());
        if (chance(45)) out += " " + pick(adjectives());
        out += " " + pick(nouns());
        return out;
    }

    std::string clause() {
        std::string subject = chance(30) ? pick(pronouns()) : noun_phrase();
        std::string out = subject + " ";
        if (chance(25)) out += pick(adverbs()) + " ";
        out += pick(verbs()) + " " + noun_phrase();
        if (chance(35)) out += " " + pick(prepositions()) + " the " + pick(places());
        return out;
    }

    std::string sentence() {
        std::string out = clause();
        if (chance(40)) {
            out += chance(50) ? " , " : " ";
            out += pick(connectors()) + " " + clause();
        }
        out += chance(8) ? " !" : (chance(8) ? " ?" : " .");
        return out;
    }

private:
    std::mt19937_64 rng_;
};

inline std::vector<std::string> make_corpus_lines(std::uint64_t seed, std::size_t target_bytes) {
    CorpusGen gen(seed);
    std::vector<std::string> lines;
    std::size_t bytes = 0;
    while (bytes < target_bytes) {
        lines.push_back(gen.sentence());
        bytes += lines.back().size() + 1;
    }
    return lines;
}

inline const std::vector<std::string>& shared_corpus() {
    static const std::vector<std::string> lines = make_corpus_lines(20240817, 1u << 20);
    return lines;
}

inline const rdht::NGramModel& shared_model() {
    static const rdht::NGramModel model = rdht::NGramModel::build(shared_corpus(), 2, 1);
    return model;
}

// ---------------------------------------------------------------------------
// Tiny hand-built model matching the smoothed-prediction worked example:
// vocabulary {a, b, c}, forward counts for context [a]: b:3, c:1.
inline rdht::NGramModel fixture_abc_model() {
    rdht::Vocabulary vocab;
    rdht::TokenId a = vocab.intern("a");
    rdht::TokenId b = vocab.intern("b");
    rdht::TokenId c = vocab.intern("c");
    std::vector<rdht::CountRow> fwd = {
        {{}, a, 4}, {{}, b, 3}, {{}, c, 1}, // unigrams
        {{a}, b, 3}, {{a}, c, 1},
    };
    std::vector<rdht::CountRow> bwd = {
        {{}, a, 4}, {{}, b, 3}, {{}, c, 1},
        {{b}, a, 3}, {{c}, a, 1},
    };
    return rdht::NGramModel(std::move(vocab), 2, std::move(fwd), std::move(bwd));
}

// Canonical distribution assembled directly from (token, micros) pairs.
inline rdht::Distribution make_dist(std::vector<rdht::DistEntry> entries) {
    rdht::Distribution dist{std::move(entries)};
    rdht::check_canonical(dist);
    return dist;
}

// ---------------------------------------------------------------------------
// Independent FNV-1a 64 oracle (do not share code with the library).
inline std::uint64_t oracle_fnv1a64(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull; // 14695981039346656037
    for (std::uint8_t b : bytes) {
        hash = (hash ^ b) * 0x100000001b3ull; // 1099511628211
    }
    return hash;
}

inline std::uint64_t oracle_fnv1a64(const std::vector<std::uint8_t>& salt,
                                    const std::string& surface) {
    std::vector<std::uint8_t> bytes = salt;
    bytes.insert(bytes.end(), surface.begin(), surface.end());
    return oracle_fnv1a64(bytes);
}

// ---------------------------------------------------------------------------
// Filesystem helpers for CLI-level tests.
class TempDir {
public:
    TempDir() {
        char tmpl[] = "/tmp/rdht_test_XXXXXX";
        char* made = mkdtemp(tmpl);
        if (made == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = made;
    }
    ~TempDir() {
        std::string cmd = "rm -rf '" + path_ + "'";
        if (std::system(cmd.c_str()) != 0) {
            std::fprintf(stderr, "warning: failed to clean %s\n", path_.c_str());
        }
    }
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::string text = read_text(path);
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& data) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

// Runs a shell command, returns its exit code (-1 if it died on a signal).
inline int run_cmd(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

} // namespace testsupport
