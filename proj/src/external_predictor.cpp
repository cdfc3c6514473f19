#include "rdht/external_predictor.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <set>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace rdht {

namespace {

[[noreturn]] void unavailable() { fail(ErrorKind::io, "predictor unavailable"); }
[[noreturn]] void violation() { fail(ErrorKind::io, "protocol violation"); }

void ignore_sigpipe_once() {
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

bool has_whitespace(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

} // namespace

ProcessChannel::ProcessChannel(const std::string& command) {
    ignore_sigpipe_once();
    int to_pipe[2];
    int from_pipe[2];
    if (pipe(to_pipe) != 0) unavailable();
    if (pipe(from_pipe) != 0) {
        close(to_pipe[0]);
        close(to_pipe[1]);
        unavailable();
    }
    pid_t pid = fork();
    if (pid < 0) {
        close(to_pipe[0]);
        close(to_pipe[1]);
        close(from_pipe[0]);
        close(from_pipe[1]);
        unavailable();
    }
    if (pid == 0) {
        dup2(to_pipe[0], STDIN_FILENO);
        dup2(from_pipe[1], STDOUT_FILENO);
        close(to_pipe[0]);
        close(to_pipe[1]);
        close(from_pipe[0]);
        close(from_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    pid_ = pid;
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
    close(to_pipe[0]);
    close(from_pipe[1]);
}

ProcessChannel::~ProcessChannel() {
    shutdown();
}

void ProcessChannel::shutdown() {
    if (to_child_ >= 0) {
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        int status = 0;
        waitpid(static_cast<pid_t>(pid_), &status, 0);
        pid_ = -1;
    }
}

std::string ProcessChannel::roundtrip(const std::string& request_line) {
    if (to_child_ < 0 || from_child_ < 0) unavailable();
    std::string out = request_line;
    out.push_back('\n');
    std::size_t written = 0;
    while (written < out.size()) {
        ssize_t n = write(to_child_, out.data() + written, out.size() - written);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) unavailable();
        written += static_cast<std::size_t>(n);
    }
    while (true) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        ssize_t n = read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) unavailable();
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string build_predict_request(const std::vector<std::string>& surfaces,
                                  std::size_t mask_index, std::size_t top_k) {
    nlohmann::ordered_json doc;
    doc["tokens"] = surfaces;
    doc["mask_index"] = mask_index;
    doc["top_k"] = top_k;
    return doc.dump();
}

std::vector<std::pair<std::string, double>> parse_predict_response(const std::string& line) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        violation();
    }
    if (!doc.is_object() || !doc.contains("candidates") || !doc["candidates"].is_array()) {
        violation();
    }
    std::vector<std::pair<std::string, double>> out;
    std::set<std::string> seen;
    for (const auto& item : doc["candidates"]) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
            !item[1].is_number()) {
            violation();
        }
        std::string surface = item[0].get<std::string>();
        double prob = item[1].get<double>();
        if (std::isnan(prob) || prob < 0.0 || prob > 1.0) violation();
        if (surface.empty() || has_whitespace(surface) || surface == kMaskSurface) violation();
        if (!seen.insert(surface).second) violation();
        out.emplace_back(std::move(surface), prob);
    }
    return out;
}

namespace {

std::vector<std::string> render_surfaces(const Vocabulary& vocab, const MaskedText& masked) {
    std::vector<std::string> surfaces;
    surfaces.reserve(masked.size());
    for (const auto& slot : masked) {
        surfaces.push_back(slot.has_value() ? vocab.surface(*slot)
                                            : std::string(kMaskSurface));
    }
    return surfaces;
}

// grow_into, when set, receives ids for surfaces the vocabulary has not
// seen; otherwise unknown candidates are dropped.
Distribution query_impl(PredictorChannel& channel, const Vocabulary& vocab,
                        Vocabulary* grow_into, const MaskedText& masked,
                        std::size_t index, std::size_t top_k) {
    if (index >= masked.size() || masked[index].has_value()) {
        fail(ErrorKind::usage, "not a masked slot");
    }
    std::string request = build_predict_request(render_surfaces(vocab, masked), index, top_k);
    auto candidates = parse_predict_response(channel.roundtrip(request));

    if (grow_into != nullptr) {
        std::vector<std::string> unknown;
        for (const auto& [surface, prob] : candidates) {
            if (!grow_into->lookup(surface)) unknown.push_back(surface);
        }
        std::sort(unknown.begin(), unknown.end());
        for (const std::string& surface : unknown) grow_into->intern(surface);
    }

    const auto oov = vocab.oov_id();
    std::vector<ScoredToken> scored;
    scored.reserve(candidates.size());
    for (const auto& [surface, prob] : candidates) {
        auto id = vocab.lookup(surface);
        if (!id) continue;            // outside the local vocabulary
        if (oov && *oov == *id) continue;
        scored.push_back({*id, prob});
    }
    return canonicalize(std::move(scored), top_k);
}

} // namespace

Distribution query_external(PredictorChannel& channel, const Vocabulary& vocab,
                            const MaskedText& masked, std::size_t index,
                            std::size_t top_k) {
    return query_impl(channel, vocab, nullptr, masked, index, top_k);
}

Distribution ExternalPredictor::predict(const MaskedText& text, std::size_t index) {
    return query_impl(channel_, vocab_, grow_ ? &vocab_ : nullptr, text, index, top_k_);
}

} // namespace rdht
