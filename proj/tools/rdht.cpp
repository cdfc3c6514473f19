// rdht — reversible data hiding in text.
//
// Hider side: build-model, keygen, embed. Receiver side: extract, recover.
// eval runs the metrics grid. Every failure exits non-zero with a single
// machine-parsable line on stderr: "rdht: error: <cause>: <detail>".

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdht/coders.hpp"
#include "rdht/external_predictor.hpp"
#include "rdht/harness.hpp"
#include "rdht/ngram_model.hpp"
#include "rdht/rdh.hpp"
#include "rdht/tokenizer.hpp"

namespace {

using namespace rdht;

bool file_exists(const std::string& path) {
    struct stat st {};
    return stat(path.c_str(), &st) == 0;
}

void require_writable(const std::string& path, bool force) {
    if (!force && file_exists(path)) {
        fail(ErrorKind::io, "output exists (use --force to overwrite): " + path);
    }
}

std::string read_file_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::string text = read_file_text(path);
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

void write_file_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot open file for writing: " + path);
    out << text;
    if (!out) fail(ErrorKind::io, "write failed: " + path);
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) fail(ErrorKind::io, "write failed: " + path);
}

std::vector<std::uint8_t> parse_salt_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) fail(ErrorKind::usage, "salt must be an even-length hex string");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        fail(ErrorKind::usage, "salt must be hex");
    };
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
    }
    return out;
}

struct StrategyFlags {
    std::string strategy = "block";
    double tp = 0.0;
    int bins_bits = 1;
    std::string salt_hex;
    int max_block_bits = 8;

    EncoderConfig to_config() const {
        EncoderConfig config;
        config.strategy = strategy_from_name(strategy);
        config.tp_micros = tp_to_micros(tp);
        config.max_block_bits = max_block_bits;
        config.bins_bits = bins_bits;
        config.salt = parse_salt_hex(salt_hex);
        return config;
    }
};

void add_strategy_flags(CLI::App* cmd, StrategyFlags& flags) {
    cmd->add_option("--strategy", flags.strategy, "block|huffman|adg|bins")
        ->default_val("block");
    cmd->add_option("--tp", flags.tp, "probability threshold for block/huffman/adg");
    cmd->add_option("--bins-bits", flags.bins_bits, "payload bits per word for bins");
    cmd->add_option("--salt", flags.salt_hex, "hex salt for the bins hash");
    cmd->add_option("--max-block-bits", flags.max_block_bits, "cap on bits per step");
}

TokenIds surfaces_to_cover_ids(const std::vector<std::string>& surfaces,
                               const Vocabulary& vocab) {
    TokenIds ids;
    ids.reserve(surfaces.size());
    for (const std::string& s : surfaces) {
        auto id = vocab.lookup(s);
        if (!id) fail(ErrorKind::usage, "unknown cover token \"" + s + "\"");
        ids.push_back(*id);
    }
    return ids;
}

int cmd_build_model(const std::string& corpus, int order, int min_count,
                    const std::string& out, bool force) {
    require_writable(out, force);
    std::vector<std::string> lines = read_lines(corpus);
    NGramModel model = NGramModel::build(lines, order, min_count);
    model.save_file(out);
    std::cout << out << '\n';
    return 0;
}

int cmd_keygen(std::size_t n, std::size_t m, std::uint64_t seed, const std::string& mode,
               const std::string& out, bool force) {
    require_writable(out, force);
    KeyMode key_mode;
    if (mode == "even") {
        key_mode = KeyMode::even;
    } else if (mode == "random") {
        key_mode = KeyMode::random;
    } else {
        fail(ErrorKind::usage, "mode must be even or random");
    }
    PositionKey key = gen_key(n, m, seed, key_mode);
    save_key(key, out);
    std::cout << out << '\n';
    return 0;
}

int cmd_embed(const std::string& cover_path, const std::string& key_path,
              const std::string& model_path, const std::string& endpoint,
              const StrategyFlags& flags, std::size_t top_k,
              const std::string& payload_path, const std::string& out, bool force) {
    require_writable(out, force);
    if (model_path.empty() == endpoint.empty()) {
        fail(ErrorKind::usage, "exactly one of --model or --endpoint is required");
    }
    EncoderConfig config = flags.to_config();
    PositionKey key = load_key(key_path);
    std::vector<std::string> cover_surfaces = tokenize(read_file_text(cover_path));
    BitStream payload = frame(BitStream::from_bytes(read_file_bytes(payload_path)));

    std::optional<NGramModel> model;
    std::unique_ptr<ProcessChannel> channel;
    std::unique_ptr<Predictor> predictor;
    TokenIds cover;
    if (!model_path.empty()) {
        model.emplace(NGramModel::load_file(model_path));
        cover = surfaces_to_cover_ids(cover_surfaces, model->vocabulary());
        predictor = std::make_unique<BuiltinPredictor>(*model, top_k);
    } else {
        channel = std::make_unique<ProcessChannel>(endpoint);
        auto external = std::make_unique<ExternalPredictor>(*channel, Vocabulary{}, true, top_k);
        for (const std::string& s : cover_surfaces) {
            cover.push_back(external->vocabulary_mutable().intern(s));
        }
        predictor = std::move(external);
    }

    MaskedText masked = init_masked(cover, key);
    EmbedResult result = embed(masked, *predictor, config, payload);

    std::vector<std::string> marked_surfaces;
    marked_surfaces.reserve(result.marked.size());
    for (TokenId id : result.marked) {
        marked_surfaces.push_back(predictor->vocabulary().surface(id));
    }
    write_file_text(out, join_tokens(marked_surfaces) + "\n");

    const EmbedReport& report = result.report;
    std::cerr << "capacity=" << report.capacity << " bits_embedded=" << report.bits_embedded
              << " padding=" << report.padding_bits
              << " exhausted=" << (report.exhausted ? "yes" : "no")
              << " degraded_steps=" << report.degraded_steps << '\n';
    std::cout << out << '\n';
    return 0;
}

int cmd_extract(const std::string& marked_path, const std::string& key_path,
                const std::string& model_path, const std::string& endpoint,
                const StrategyFlags& flags, std::size_t top_k, const std::string& out,
                bool force) {
    require_writable(out, force);
    if (!model_path.empty() && !endpoint.empty()) {
        fail(ErrorKind::usage, "--model and --endpoint are mutually exclusive");
    }
    EncoderConfig config = flags.to_config();
    PositionKey key = load_key(key_path);
    std::vector<std::string> marked_surfaces = tokenize(read_file_text(marked_path));

    BitStream payload;
    if (config.strategy == Strategy::bins) {
        payload = extract_model_free(marked_surfaces, key, config);
    } else if (!model_path.empty()) {
        NGramModel model = NGramModel::load_file(model_path);
        BuiltinPredictor predictor(model, top_k);
        payload = unframe(extract_bits_surfaces(marked_surfaces, key, predictor, config));
    } else if (!endpoint.empty()) {
        ProcessChannel channel(endpoint);
        ExternalPredictor predictor(channel, Vocabulary{}, true, top_k);
        for (std::uint32_t p : key.positions) {
            predictor.vocabulary_mutable().intern(marked_surfaces.at(p - 1));
        }
        payload = unframe(extract_bits_surfaces(marked_surfaces, key, predictor, config));
    } else {
        fail(ErrorKind::usage, "--model or --endpoint is required for this strategy");
    }

    if (payload.size() % 8 != 0) fail(ErrorKind::inconsistency, "inconsistent marked text");
    write_file_bytes(out, payload.to_bytes());
    std::cout << out << '\n';
    return 0;
}

int cmd_recover(const std::string& marked_path, const std::string& key_path,
                const std::string& out, bool force) {
    require_writable(out, force);
    PositionKey key = load_key(key_path);
    std::vector<std::string> marked = tokenize(read_file_text(marked_path));
    std::vector<std::string> cover = reconstruct_surfaces(marked, key);
    write_file_text(out, join_tokens(cover) + "\n");
    std::cout << out << '\n';
    return 0;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::usage, "invalid experiment config: " + path);
    }
    ExperimentConfig config;
    try {
        config.corpus_path = doc.at("corpus").get<std::string>();
        if (doc.contains("n_min")) config.n_min = doc["n_min"].get<int>();
        if (doc.contains("n_max")) config.n_max = doc["n_max"].get<int>();
        if (doc.contains("ratios")) config.ratios = doc["ratios"].get<std::vector<int>>();
        if (doc.contains("strategies")) {
            config.strategies.clear();
            for (const auto& name : doc["strategies"]) {
                config.strategies.push_back(strategy_from_name(name.get<std::string>()));
            }
        }
        if (doc.contains("tp")) config.tps = doc["tp"].get<std::vector<double>>();
        if (doc.contains("samples")) config.samples = doc["samples"].get<int>();
        if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("max_block_bits")) config.max_block_bits = doc["max_block_bits"].get<int>();
        if (doc.contains("bins_bits")) config.bins_bits = doc["bins_bits"].get<int>();
        if (doc.contains("salt")) config.salt = parse_salt_hex(doc["salt"].get<std::string>());
        if (doc.contains("top_k")) config.top_k = doc["top_k"].get<std::size_t>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::usage, "invalid experiment config: " + path);
    }
    config.validate();
    return config;
}

int cmd_eval(const std::string& config_path, const std::string& model_path,
             const std::string& out, std::string report_path, bool force) {
    require_writable(out, force);
    if (report_path.empty()) report_path = out + ".report.json";
    require_writable(report_path, force);

    ExperimentConfig config = load_experiment_config(config_path);
    NGramModel model = NGramModel::load_file(model_path);
    std::vector<std::string> corpus = read_lines(config.corpus_path);
    std::vector<MetricsRow> rows = run_grid(config, model, corpus);

    std::ostringstream csv;
    write_metrics_csv(rows, csv);
    write_file_text(out, csv.str());
    write_file_text(report_path, trend_report_json(check_trends(rows)));
    std::cout << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reversible data hiding in text"};
    app.require_subcommand(1);

    // build-model
    auto* build = app.add_subcommand("build-model", "count n-grams over a corpus");
    std::string corpus_path;
    int order = 3;
    int min_count = 1;
    std::string out;
    bool force = false;
    build->add_option("--corpus", corpus_path, "corpus file, one record per line")->required();
    build->add_option("--order", order, "n-gram order (>= 2)");
    build->add_option("--min-count", min_count, "minimum token frequency kept in vocabulary");
    build->add_option("--out", out, "model file to write")->required();
    build->add_flag("--force", force, "overwrite existing output");

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate a position key");
    std::size_t key_n = 0;
    std::size_t key_m = 0;
    std::uint64_t seed = 1;
    std::string mode = "random";
    keygen->add_option("--n", key_n, "cover length")->required();
    keygen->add_option("--m", key_m, "marked text length")->required();
    keygen->add_option("--seed", seed, "generator seed");
    keygen->add_option("--mode", mode, "even|random");
    keygen->add_option("--out", out, "key file to write")->required();
    keygen->add_flag("--force", force, "overwrite existing output");

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "hide a payload inside a generated text");
    std::string cover_path;
    std::string key_path;
    std::string model_path;
    std::string endpoint;
    std::string payload_path;
    std::size_t top_k = kDefaultTopK;
    StrategyFlags flags;
    embed_cmd->add_option("--cover", cover_path, "cover text file")->required();
    embed_cmd->add_option("--key", key_path, "position key file")->required();
    embed_cmd->add_option("--model", model_path, "built-in model file");
    embed_cmd->add_option("--endpoint", endpoint, "external predictor command");
    embed_cmd->add_option("--payload", payload_path, "payload bytes to hide")->required();
    embed_cmd->add_option("--top-k", top_k, "candidate list size");
    add_strategy_flags(embed_cmd, flags);
    embed_cmd->add_option("--out", out, "marked text file to write")->required();
    embed_cmd->add_flag("--force", force, "overwrite existing output");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "recover the payload from a marked text");
    std::string marked_path;
    extract_cmd->add_option("--marked", marked_path, "marked text file")->required();
    extract_cmd->add_option("--key", key_path, "position key file")->required();
    extract_cmd->add_option("--model", model_path, "built-in model file");
    extract_cmd->add_option("--endpoint", endpoint, "external predictor command");
    extract_cmd->add_option("--top-k", top_k, "candidate list size");
    add_strategy_flags(extract_cmd, flags);
    extract_cmd->add_option("--out", out, "payload file to write")->required();
    extract_cmd->add_flag("--force", force, "overwrite existing output");

    // recover
    auto* recover_cmd = app.add_subcommand("recover", "reconstruct the cover text");
    recover_cmd->add_option("--marked", marked_path, "marked text file")->required();
    recover_cmd->add_option("--key", key_path, "position key file")->required();
    recover_cmd->add_option("--out", out, "cover text file to write")->required();
    recover_cmd->add_flag("--force", force, "overwrite existing output");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "run the metrics grid");
    std::string config_path;
    std::string report_path;
    eval_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    eval_cmd->add_option("--model", model_path, "built-in model file")->required();
    eval_cmd->add_option("--out", out, "metrics CSV to write")->required();
    eval_cmd->add_option("--report", report_path, "trend report JSON (default <out>.report.json)");
    eval_cmd->add_flag("--force", force, "overwrite existing output");

    try {
        app.parse(argc, argv);
        if (build->parsed()) {
            return cmd_build_model(corpus_path, order, min_count, out, force);
        }
        if (keygen->parsed()) {
            return cmd_keygen(key_n, key_m, seed, mode, out, force);
        }
        if (embed_cmd->parsed()) {
            return cmd_embed(cover_path, key_path, model_path, endpoint, flags, top_k,
                             payload_path, out, force);
        }
        if (extract_cmd->parsed()) {
            return cmd_extract(marked_path, key_path, model_path, endpoint, flags, top_k,
                               out, force);
        }
        if (recover_cmd->parsed()) {
            return cmd_recover(marked_path, key_path, out, force);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(config_path, model_path, out, report_path, force);
        }
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    } catch (const rdht::RdhError& e) {
        std::cerr << "rdht: error: " << rdht::error_kind_name(e.kind()) << ": " << e.what()
                  << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "rdht: error: io: " << e.what() << '\n';
        return static_cast<int>(rdht::ErrorKind::io);
    }
}
