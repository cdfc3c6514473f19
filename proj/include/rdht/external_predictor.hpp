#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rdht/predictor.hpp"
#include "rdht/token.hpp"

namespace rdht {

// One request/response exchange with an external masked-token predictor.
// Requests and responses are single JSON lines.
class PredictorChannel {
public:
    virtual ~PredictorChannel() = default;
    // Sends one request line, returns the response line (no newline).
    virtual std::string roundtrip(const std::string& request_line) = 0;
};

// Runs `command` through /bin/sh and speaks the protocol over the child's
// standard streams. The child must answer one line per request line.
class ProcessChannel : public PredictorChannel {
public:
    explicit ProcessChannel(const std::string& command);
    ~ProcessChannel() override;
    ProcessChannel(const ProcessChannel&) = delete;
    ProcessChannel& operator=(const ProcessChannel&) = delete;

    std::string roundtrip(const std::string& request_line) override;

private:
    void shutdown();

    long pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

std::string build_predict_request(const std::vector<std::string>& surfaces,
                                  std::size_t mask_index, std::size_t top_k);

// Parses {"candidates": [[surface, probability], ...]} and validates:
// probabilities in [0,1], surfaces non-empty without whitespace, no mask
// sentinel, no duplicates. Violations raise "protocol violation".
std::vector<std::pair<std::string, double>> parse_predict_response(const std::string& line);

// Single query against a fixed local vocabulary: candidates outside the
// vocabulary (and the <oov> bucket) are dropped before canonicalization.
Distribution query_external(PredictorChannel& channel, const Vocabulary& vocab,
                            const MaskedText& masked, std::size_t index,
                            std::size_t top_k = kDefaultTopK);

// Predictor backed by a channel. With a fixed vocabulary unknown candidates
// are dropped; in growing (session) mode unknown surfaces are interned on
// first use, sorted lexicographically within each response, so embedding
// and the replaying extractor assign identical ids regardless of the order
// the endpoint lists candidates in.
class ExternalPredictor : public Predictor {
public:
    ExternalPredictor(PredictorChannel& channel, Vocabulary vocab, bool grow,
                      std::size_t top_k = kDefaultTopK)
        : channel_(channel), vocab_(std::move(vocab)), grow_(grow), top_k_(top_k) {}

    Distribution predict(const MaskedText& text, std::size_t index) override;
    const Vocabulary& vocabulary() const override { return vocab_; }
    Vocabulary& vocabulary_mutable() { return vocab_; }

    std::unique_ptr<Predictor> clone() const override {
        return std::make_unique<ExternalPredictor>(channel_, vocab_, grow_, top_k_);
    }

private:
    PredictorChannel& channel_;
    Vocabulary vocab_;
    bool grow_;
    std::size_t top_k_;
};

} // namespace rdht
