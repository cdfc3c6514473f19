#include "rdht/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "rdht/tokenizer.hpp"

namespace rdht {

void ExperimentConfig::validate() const {
    if (n_min < 1 || n_max < n_min) fail(ErrorKind::usage, "invalid n range");
    if (ratios.empty() || strategies.empty()) fail(ErrorKind::usage, "empty experiment grid");
    for (int r : ratios) {
        if (r < 1) fail(ErrorKind::usage, "ratios must be positive");
    }
    for (double tp : tps) {
        if (!(tp >= 0.0) || tp >= 1.0) fail(ErrorKind::usage, "tp must be in [0, 1)");
    }
    if (samples < 1) fail(ErrorKind::usage, "sample count must be at least 1");
    if (top_k < 1) fail(ErrorKind::usage, "top_k must be positive");
}

double measure_bpw(const EmbedReport& report, std::size_t m) {
    if (m < 1) fail(ErrorKind::usage, "marked length must be positive");
    return static_cast<double>(report.bits_embedded) / static_cast<double>(m);
}

double proxy_perplexity(const NGramModel& model, const TokenIds& text, std::size_t top_k) {
    if (text.empty()) fail(ErrorKind::usage, "cannot score an empty text");
    MaskedText masked(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) masked[i] = text[i];

    double log_sum = 0.0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        masked[i].reset();
        Distribution dist = model.predict(masked, i, top_k);
        masked[i] = text[i];
        std::uint32_t micros = 1; // floor for tokens outside the candidate list
        for (const DistEntry& e : dist.entries) {
            if (e.token == text[i]) {
                micros = e.micros;
                break;
            }
        }
        log_sum += std::log(static_cast<double>(micros) / kProbOne);
    }
    return std::exp(-log_sum / static_cast<double>(text.size()));
}

CoverSampler::CoverSampler(const NGramModel& model,
                           const std::vector<std::string>& corpus_lines)
    : oov_(model.vocabulary().oov_id()) {
    const Vocabulary& vocab = model.vocabulary();
    const TokenId oov_fill = oov_ ? *oov_ : 0;
    for (const std::string& line : corpus_lines) {
        std::vector<std::string> toks = tokenize(line);
        if (toks.empty()) continue;
        TokenIds ids;
        ids.reserve(toks.size());
        for (const std::string& tok : toks) {
            auto id = vocab.lookup(tok);
            ids.push_back(id ? *id : oov_fill);
        }
        lines_.push_back(std::move(ids));
    }
}

TokenIds CoverSampler::sample(std::size_t n, std::uint64_t seed) const {
    if (lines_.empty()) fail(ErrorKind::usage, "insufficient corpus");
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 2000; ++attempt) {
        const TokenIds& line = lines_[static_cast<std::size_t>(rng() % lines_.size())];
        if (line.size() < n) continue;
        std::size_t start = static_cast<std::size_t>(rng() % (line.size() - n + 1));
        bool clean = true;
        for (std::size_t i = 0; i < n && clean; ++i) {
            if (oov_ && line[start + i] == *oov_) clean = false;
        }
        if (!clean) continue;
        return TokenIds(line.begin() + static_cast<std::ptrdiff_t>(start),
                        line.begin() + static_cast<std::ptrdiff_t>(start + n));
    }
    fail(ErrorKind::usage, "insufficient corpus");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = 14695981039346656037ull;
    auto step = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    step(seed);
    step(a);
    step(b);
    step(c);
    return h;
}

std::vector<MetricsRow> run_grid(const ExperimentConfig& config, const NGramModel& model,
                                 const std::vector<std::string>& corpus_lines) {
    config.validate();
    CoverSampler sampler(model, corpus_lines);
    BuiltinPredictor predictor(model, config.top_k);

    std::vector<MetricsRow> rows;
    for (Strategy strategy : config.strategies) {
        const bool uses_tp = strategy != Strategy::bins;
        std::vector<std::optional<double>> tp_cells;
        if (uses_tp) {
            for (double tp : config.tps) tp_cells.emplace_back(tp);
        } else {
            tp_cells.emplace_back(std::nullopt);
        }

        for (const auto& tp : tp_cells) {
            for (int ratio : config.ratios) {
                EncoderConfig coder;
                coder.strategy = strategy;
                coder.tp_micros = tp ? tp_to_micros(*tp) : 0;
                coder.max_block_bits = config.max_block_bits;
                coder.bins_bits = config.bins_bits;
                coder.salt = config.salt;

                double bpw_sum = 0.0;
                double ppl_sum = 0.0;
                for (int s = 0; s < config.samples; ++s) {
                    // Instances are paired across the strategy and threshold
                    // axes: cells at equal ratio embed into identical texts,
                    // so column differences reflect the coder, not sampling.
                    std::uint64_t base = mix_seed(config.seed, static_cast<std::uint64_t>(s));
                    std::mt19937_64 rng(base);
                    const auto span = static_cast<std::uint64_t>(config.n_max - config.n_min + 1);
                    const std::size_t n = static_cast<std::size_t>(config.n_min) +
                                          static_cast<std::size_t>(rng() % span);
                    TokenIds cover = sampler.sample(n, mix_seed(base, 1));
                    PositionKey key = gen_key(n, n * static_cast<std::size_t>(ratio),
                                              mix_seed(base, 2, static_cast<std::uint64_t>(ratio)),
                                              KeyMode::random);
                    MaskedText masked = init_masked(cover, key);
                    RandomBitSource source(mix_seed(base, 3));
                    EmbedResult result = embed_with_source(masked, predictor, coder, source);
                    bpw_sum += measure_bpw(result.report, result.marked.size());
                    ppl_sum += proxy_perplexity(model, result.marked, config.top_k);
                }
                rows.push_back({strategy, tp, ratio, bpw_sum / config.samples,
                                ppl_sum / config.samples, config.samples});
            }
        }
    }
    return rows;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
    out << "strategy,t_p,ratio,mean_bpw,mean_proxy_ppl,samples\n";
    out << std::fixed;
    for (const MetricsRow& row : rows) {
        out << strategy_name(row.strategy) << ',';
        if (row.tp) {
            out << std::setprecision(6) << *row.tp;
        } else {
            out << '-';
        }
        out << ',' << row.ratio << ',' << std::setprecision(6) << row.mean_bpw << ','
            << std::setprecision(6) << row.mean_proxy_ppl << ',' << row.samples << '\n';
    }
}

namespace {

std::string cell_name(Strategy s, double tp, int ratio) {
    std::ostringstream os;
    os << strategy_name(s) << " t_p=" << std::fixed << std::setprecision(2) << tp
       << " m/n=" << ratio;
    return os.str();
}

} // namespace

TrendReport check_trends(const std::vector<MetricsRow>& rows) {
    TrendReport report;
    // (strategy, tp, ratio) -> row
    std::map<std::tuple<Strategy, double, int>, const MetricsRow*> cells;
    std::vector<double> tps;
    std::vector<int> ratios;
    for (const MetricsRow& row : rows) {
        if (!row.tp) continue;
        cells[{row.strategy, *row.tp, row.ratio}] = &row;
        if (std::find(tps.begin(), tps.end(), *row.tp) == tps.end()) tps.push_back(*row.tp);
        if (std::find(ratios.begin(), ratios.end(), row.ratio) == ratios.end()) {
            ratios.push_back(row.ratio);
        }
    }
    std::sort(tps.begin(), tps.end());
    std::sort(ratios.begin(), ratios.end());

    for (Strategy s : {Strategy::block, Strategy::huffman, Strategy::adg}) {
        for (int ratio : ratios) {
            for (std::size_t t = 1; t < tps.size(); ++t) {
                auto lo = cells.find({s, tps[t - 1], ratio});
                auto hi = cells.find({s, tps[t], ratio});
                if (lo == cells.end() || hi == cells.end()) continue;
                if (!(hi->second->mean_bpw < lo->second->mean_bpw)) {
                    report.bpw_decreasing_in_tp = false;
                    report.flags.push_back("bpw not strictly decreasing in t_p at " +
                                           cell_name(s, tps[t], ratio));
                }
                if (hi->second->mean_proxy_ppl > lo->second->mean_proxy_ppl) {
                    report.ppl_nonincreasing_in_tp = false;
                    report.flags.push_back("proxy ppl increases in t_p at " +
                                           cell_name(s, tps[t], ratio));
                }
            }
        }
        for (double tp : tps) {
            for (std::size_t r = 1; r < ratios.size(); ++r) {
                auto lo = cells.find({s, tp, ratios[r - 1]});
                auto hi = cells.find({s, tp, ratios[r]});
                if (lo == cells.end() || hi == cells.end()) continue;
                if (!(hi->second->mean_bpw > lo->second->mean_bpw)) {
                    report.bpw_increasing_in_ratio = false;
                    report.flags.push_back("bpw not strictly increasing in m/n at " +
                                           cell_name(s, tp, ratios[r]));
                }
                if (hi->second->mean_proxy_ppl > lo->second->mean_proxy_ppl) {
                    report.ppl_nonincreasing_in_ratio = false;
                    report.flags.push_back("proxy ppl increases in m/n at " +
                                           cell_name(s, tp, ratios[r]));
                }
            }
        }
    }

    for (double tp : tps) {
        for (int ratio : ratios) {
            auto huff = cells.find({Strategy::huffman, tp, ratio});
            auto block = cells.find({Strategy::block, tp, ratio});
            if (huff == cells.end() || block == cells.end()) continue;
            if (huff->second->mean_bpw < block->second->mean_bpw * 0.98) {
                report.huffman_ge_block = false;
                report.flags.push_back("huffman bpw below block by more than 2% at " +
                                       cell_name(Strategy::huffman, tp, ratio));
            }
        }
    }
    return report;
}

std::string trend_report_json(const TrendReport& report) {
    std::ostringstream os;
    auto boolstr = [](bool b) { return b ? "true" : "false"; };
    os << "{\n"
       << "  \"bpw_decreasing_in_tp\": " << boolstr(report.bpw_decreasing_in_tp) << ",\n"
       << "  \"bpw_increasing_in_ratio\": " << boolstr(report.bpw_increasing_in_ratio) << ",\n"
       << "  \"huffman_ge_block\": " << boolstr(report.huffman_ge_block) << ",\n"
       << "  \"ppl_nonincreasing_in_tp\": " << boolstr(report.ppl_nonincreasing_in_tp) << ",\n"
       << "  \"ppl_nonincreasing_in_ratio\": " << boolstr(report.ppl_nonincreasing_in_ratio) << ",\n"
       << "  \"flags\": [";
    for (std::size_t i = 0; i < report.flags.size(); ++i) {
        if (i > 0) os << ", ";
        os << '"' << report.flags[i] << '"';
    }
    os << "]\n}\n";
    return os.str();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace rdht
