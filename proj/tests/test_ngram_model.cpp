#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rdht/ngram_model.hpp"
#include "support.hpp"

using namespace rdht;

namespace {

MaskedText masked_of(std::initializer_list<int> slots) {
    MaskedText out;
    for (int s : slots) {
        if (s < 0) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(static_cast<TokenId>(s));
        }
    }
    return out;
}

} // namespace

TEST_CASE("bigram counts over a tiny corpus") {
    NGramModel model = NGramModel::build({"a b a b"}, 2, 1);
    const Vocabulary& vocab = model.vocabulary();
    REQUIRE(vocab.size() == 3);
    CHECK(vocab.surface(0) == "a");
    CHECK(vocab.surface(1) == "b");
    CHECK(vocab.surface(2) == "<oov>");

    CHECK(model.forward_count({0}, 1) == 2); // a -> b twice
    CHECK(model.forward_count({1}, 0) == 1); // b -> a once
    CHECK(model.forward_count({}, 0) == 2);  // unigram a
    CHECK(model.backward_count({1}, 0) == 2); // a followed by b twice
    CHECK(model.backward_count({0}, 1) == 1);
    CHECK(model.total_tokens() == 4);
}

TEST_CASE("build rejects bad inputs") {
    CHECK_THROWS_WITH_AS(NGramModel::build({}, 2, 1), "empty corpus", RdhError);
    CHECK_THROWS_WITH_AS(NGramModel::build({"", "  "}, 2, 1), "empty corpus", RdhError);
    CHECK_THROWS_WITH_AS(NGramModel::build({"x"}, 2, 2), "degenerate vocabulary", RdhError);
    CHECK_THROWS_AS(NGramModel::build({"a b"}, 1, 1), RdhError);
}

TEST_CASE("add-one smoothing over a single-direction context") {
    // Vocabulary {a, b, c} with forward counts a->b:3, a->c:1. Smoothed
    // probabilities for [a, MASK] are 4/7, 2/7, 1/7, quantized.
    NGramModel model = testsupport::fixture_abc_model();
    Distribution dist = model.predict(masked_of({0, -1}), 1);
    REQUIRE(dist.size() == 3);
    CHECK(dist.entries[0].token == 1); // b
    CHECK(dist.entries[0].micros == 571429);
    CHECK(dist.entries[1].token == 2); // c
    CHECK(dist.entries[1].micros == 285714);
    CHECK(dist.entries[2].token == 0); // a
    CHECK(dist.entries[2].micros == 142857);
}

TEST_CASE("uniform counts give a uniform distribution tie-broken by id") {
    NGramModel model = NGramModel::build({"a b c d"}, 2, 1);
    Distribution dist = model.predict(masked_of({-1, -1}), 0);
    REQUIRE(dist.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(dist.entries[i].token == i);
        CHECK(dist.entries[i].micros == 250000);
    }
}

TEST_CASE("all-mask context falls back to the smoothed unigram distribution") {
    NGramModel model = NGramModel::build({"a b a b"}, 2, 1);
    Distribution expected = model.predict(masked_of({-1}), 0); // no context at all
    Distribution dist = model.predict(masked_of({-1, -1, -1}), 1);
    REQUIRE(dist.size() == expected.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        CHECK(dist.entries[i].token == expected.entries[i].token);
        CHECK(dist.entries[i].micros == expected.entries[i].micros);
    }
    CHECK(dist.entries[0].micros == 500000); // a and b split evenly
}

TEST_CASE("a mask truncates the context window") {
    NGramModel model = testsupport::fixture_abc_model();
    // Slot 2 sees a mask to its left, so the forward side is empty and the
    // prediction equals the unigram fallback.
    Distribution truncated = model.predict(masked_of({0, -1, -1}), 2);
    Distribution unigram = model.predict(masked_of({-1}), 0);
    REQUIRE(truncated.size() == unigram.size());
    for (std::size_t i = 0; i < truncated.size(); ++i) {
        CHECK(truncated.entries[i].token == unigram.entries[i].token);
        CHECK(truncated.entries[i].micros == unigram.entries[i].micros);
    }
}

TEST_CASE("the oov bucket is never a candidate") {
    NGramModel model = NGramModel::build({"a b a b c c c"}, 2, 1);
    const auto oov = model.vocabulary().oov_id();
    REQUIRE(oov.has_value());
    Distribution dist = model.predict(masked_of({-1, -1}), 0);
    for (const auto& e : dist.entries) CHECK(e.token != *oov);
}

TEST_CASE("order-3 context keys run outward from the slot") {
    NGramModel model = NGramModel::build({"a b c"}, 3, 1);
    // Ids sort by (frequency, surface): a=0, b=1, c=2.
    CHECK(model.forward_count({0, 1}, 2) == 1);  // c after "a b"
    CHECK(model.backward_count({1, 2}, 0) == 1); // a before "b c", nearest first
    CHECK(model.backward_count({2, 1}, 0) == 0);
    CHECK(model.forward_count({1}, 2) == 1);
    CHECK(model.backward_count({1}, 0) == 1);
}

TEST_CASE("predict validates the slot") {
    NGramModel model = NGramModel::build({"a b a b"}, 2, 1);
    CHECK_THROWS_WITH_AS(model.predict(masked_of({0, 1}), 1), "not a masked slot", RdhError);
    CHECK_THROWS_WITH_AS(model.predict(masked_of({-1}), 3), "not a masked slot", RdhError);
}

TEST_CASE("repeated predictions are identical") {
    const NGramModel& model = testsupport::shared_model();
    MaskedText masked = masked_of({-1, -1, -1, -1});
    masked[0] = *model.vocabulary().lookup("the");
    Distribution first = model.predict(masked, 2);
    for (int i = 0; i < 5; ++i) {
        Distribution again = model.predict(masked, 2);
        REQUIRE(again.size() == first.size());
        for (std::size_t j = 0; j < first.size(); ++j) {
            CHECK(again.entries[j].token == first.entries[j].token);
            CHECK(again.entries[j].micros == first.entries[j].micros);
        }
    }
}

TEST_CASE("save/load round-trips byte-identically and preserves predictions") {
    NGramModel model = NGramModel::build({"a b a b", "b c a", "c c b a"}, 3, 1);
    std::ostringstream first;
    model.save(first);
    CHECK(first.str().substr(0, 4) == "RDHM");

    std::istringstream in(first.str());
    NGramModel loaded = NGramModel::load(in);
    std::ostringstream second;
    loaded.save(second);
    CHECK(first.str() == second.str());

    CHECK(loaded.order() == model.order());
    CHECK(loaded.vocabulary().size() == model.vocabulary().size());
    Distribution a = model.predict(masked_of({0, -1, 1}), 1);
    Distribution b = loaded.predict(masked_of({0, -1, 1}), 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.entries[i].token == b.entries[i].token);
        CHECK(a.entries[i].micros == b.entries[i].micros);
    }
}

TEST_CASE("model file validation") {
    NGramModel model = NGramModel::build({"a b a b"}, 2, 1);
    std::ostringstream out;
    model.save(out);
    std::string blob = out.str();

    {
        std::string bad = blob;
        bad[0] = 'X';
        std::istringstream in(bad);
        CHECK_THROWS_WITH_AS(NGramModel::load(in), "corrupt model", RdhError);
    }
    {
        std::string bad = blob;
        bad[4] = 0x03; // version 999 big-endian
        bad[5] = static_cast<char>(0xE7);
        std::istringstream in(bad);
        CHECK_THROWS_WITH_AS(NGramModel::load(in), "unsupported model version", RdhError);
    }
    {
        std::string bad = blob.substr(0, blob.size() - 3); // truncated
        std::istringstream in(bad);
        CHECK_THROWS_WITH_AS(NGramModel::load(in), "corrupt model", RdhError);
    }
    {
        std::string bad = blob + "xx"; // trailing garbage
        std::istringstream in(bad);
        CHECK_THROWS_WITH_AS(NGramModel::load(in), "corrupt model", RdhError);
    }
}
