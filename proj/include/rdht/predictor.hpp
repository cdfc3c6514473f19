#pragma once

#include <memory>

#include "rdht/distribution.hpp"
#include "rdht/ngram_model.hpp"
#include "rdht/token.hpp"

namespace rdht {

// Source of candidate distributions for masked slots. Implementations must
// be deterministic: the same text and index always yield the same
// distribution, or the extractor cannot replay embedding decisions.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual Distribution predict(const MaskedText& text, std::size_t index) = 0;
    // Vocabulary the returned token ids refer to.
    virtual const Vocabulary& vocabulary() const = 0;
    // Independent copy for throwaway passes such as capacity dry runs, so
    // stateful predictors (growing session vocabularies) are not disturbed.
    // nullptr means dry runs are unsupported.
    virtual std::unique_ptr<Predictor> clone() const { return nullptr; }
};

class BuiltinPredictor : public Predictor {
public:
    explicit BuiltinPredictor(const NGramModel& model, std::size_t top_k = kDefaultTopK)
        : model_(model), top_k_(top_k) {}

    Distribution predict(const MaskedText& text, std::size_t index) override {
        return model_.predict(text, index, top_k_);
    }

    const Vocabulary& vocabulary() const override { return model_.vocabulary(); }

    std::unique_ptr<Predictor> clone() const override {
        return std::make_unique<BuiltinPredictor>(model_, top_k_);
    }

private:
    const NGramModel& model_;
    std::size_t top_k_;
};

} // namespace rdht
