#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdht/coders.hpp"
#include "rdht/ngram_model.hpp"
#include "rdht/rdh.hpp"

namespace rdht {

// Grid of embedding experiments: strategies crossed with thresholds and
// marked/cover length ratios, a fixed number of seeded samples per cell.
struct ExperimentConfig {
    std::string corpus_path;
    int n_min = 4;
    int n_max = 8;
    std::vector<int> ratios = {3, 4, 5};
    std::vector<Strategy> strategies = {Strategy::block, Strategy::huffman,
                                        Strategy::adg, Strategy::bins};
    std::vector<double> tps = {0.02, 0.03, 0.04};
    int samples = 200;
    std::uint64_t seed = 1;
    int max_block_bits = 8;
    int bins_bits = 1;
    std::vector<std::uint8_t> salt;
    std::size_t top_k = kDefaultTopK;

    void validate() const;
};

struct MetricsRow {
    Strategy strategy;
    std::optional<double> tp; // absent for bins
    int ratio;
    double mean_bpw;
    double mean_proxy_ppl;
    int samples;
};

// Payload bits per marked word; exhaustion padding does not count.
double measure_bpw(const EmbedReport& report, std::size_t m);

// exp of the mean negative log probability of each token under the model,
// every other slot filled. Tokens falling outside the canonical candidate
// list are floored at one probability quantum (1e-6).
double proxy_perplexity(const NGramModel& model, const TokenIds& text,
                        std::size_t top_k = kDefaultTopK);

// Seeded sampling of cover windows: contiguous in-vocabulary token runs
// that never cross record boundaries.
class CoverSampler {
public:
    CoverSampler(const NGramModel& model, const std::vector<std::string>& corpus_lines);

    // Deterministic for a given (n, seed); throws "insufficient corpus"
    // when no window can be found.
    TokenIds sample(std::size_t n, std::uint64_t seed) const;

private:
    std::vector<TokenIds> lines_;
    std::optional<TokenId> oov_;
};

// Runs every grid cell with an unbounded seeded payload source (bpw then
// measures capacity) and returns rows in (strategy, tp, ratio) order.
std::vector<MetricsRow> run_grid(const ExperimentConfig& config, const NGramModel& model,
                                 const std::vector<std::string>& corpus_lines);

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out);

struct TrendReport {
    bool bpw_decreasing_in_tp = true;  // strict, per ratio
    bool bpw_increasing_in_ratio = true; // strict, per tp
    bool huffman_ge_block = true;      // within 2% relative tolerance
    bool ppl_nonincreasing_in_tp = true;
    bool ppl_nonincreasing_in_ratio = true;
    std::vector<std::string> flags;
};

// Evaluates the monotone relations over the grid rows for the
// threshold-driven strategies (block, huffman, adg).
TrendReport check_trends(const std::vector<MetricsRow>& rows);

std::string trend_report_json(const TrendReport& report);

std::vector<std::string> read_lines(const std::string& path);

// Small deterministic mixer for deriving per-cell and per-sample seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0);

} // namespace rdht
