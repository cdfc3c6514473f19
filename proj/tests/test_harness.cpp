#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rdht/harness.hpp"
#include "support.hpp"

using namespace rdht;

TEST_CASE("bpw is payload bits over marked length") {
    EmbedReport report;
    report.bits_embedded = 9;
    CHECK(measure_bpw(report, 12) == doctest::Approx(0.75).epsilon(1e-12));
    report.bits_embedded = 0;
    CHECK(measure_bpw(report, 5) == 0.0);
}

TEST_CASE("uniform model gives proxy perplexity equal to the candidate count") {
    Vocabulary vocab;
    for (const char* s : {"a", "b", "c", "d"}) vocab.intern(s);
    NGramModel model(std::move(vocab), 2, {}, {});
    CHECK(proxy_perplexity(model, {0, 1}) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(proxy_perplexity(model, {3, 3, 3}) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("a near-deterministic model scores its own text near one") {
    std::string run_of_a;
    for (int i = 0; i < 2000; ++i) run_of_a += "a ";
    NGramModel model = NGramModel::build({run_of_a, "b"}, 2, 1);
    TokenId a = *model.vocabulary().lookup("a");
    double ppl = proxy_perplexity(model, {a, a, a, a});
    CHECK(ppl < 1.01);
    CHECK(ppl >= 1.0);
}

TEST_CASE("proxy perplexity matches a direct log-sum oracle") {
    NGramModel model = testsupport::fixture_abc_model();
    // Text [a, b]: slot probabilities read off the canonical distributions.
    MaskedText m0 = {std::nullopt, 1};
    MaskedText m1 = {0, std::nullopt};
    double p0 = 0.0;
    double p1 = 0.0;
    for (const auto& e : model.predict(m0, 0).entries) {
        if (e.token == 0) p0 = e.micros / 1e6;
    }
    for (const auto& e : model.predict(m1, 1).entries) {
        if (e.token == 1) p1 = e.micros / 1e6;
    }
    REQUIRE(p0 > 0.0);
    REQUIRE(p1 > 0.0);
    double expected = std::exp(-(std::log(p0) + std::log(p1)) / 2.0);
    CHECK(proxy_perplexity(model, {0, 1}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cover sampler avoids oov and respects record boundaries") {
    std::vector<std::string> corpus;
    for (int i = 0; i < 5; ++i) corpus.push_back("a b c d e f g h");
    corpus.push_back("zzz qqq"); // these stay below min_count
    NGramModel model2 = NGramModel::build(corpus, 2, 5);
    CoverSampler sampler(model2, corpus);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TokenIds cover = sampler.sample(4, seed);
        CHECK(cover.size() == 4);
        for (TokenId id : cover) CHECK(id != *model2.vocabulary().oov_id());
    }
    CHECK_THROWS_WITH_AS(sampler.sample(9, 0), "insufficient corpus", RdhError);
}

TEST_CASE("bins grid hits the closed-form bpw exactly") {
    const NGramModel& model = testsupport::shared_model();
    ExperimentConfig config;
    config.strategies = {Strategy::bins};
    config.ratios = {3, 4, 5};
    config.samples = 4;
    config.seed = 7;

    for (int r : {1, 2}) {
        config.bins_bits = r;
        auto rows = run_grid(config, model, testsupport::shared_corpus());
        REQUIRE(rows.size() == 3);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const MetricsRow& row = rows[i];
            CHECK(!row.tp.has_value());
            double expected = r * (row.ratio - 1.0) / row.ratio;
            CHECK(row.mean_bpw == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("the grid is deterministic for a fixed seed") {
    const NGramModel& model = testsupport::shared_model();
    ExperimentConfig config;
    config.strategies = {Strategy::block, Strategy::bins};
    config.tps = {0.02};
    config.ratios = {3};
    config.samples = 3;
    config.seed = 99;

    auto render = [&] {
        auto rows = run_grid(config, model, testsupport::shared_corpus());
        std::ostringstream os;
        write_metrics_csv(rows, os);
        return os.str();
    };
    std::string first = render();
    CHECK(first == render());
    CHECK(first.find("strategy,t_p,ratio,mean_bpw,mean_proxy_ppl,samples") == 0);
    CHECK(first.find("bins,-,3,") != std::string::npos);
}

TEST_CASE("a corpus without usable windows fails") {
    const NGramModel& model = testsupport::shared_model();
    ExperimentConfig config;
    config.samples = 2;
    CHECK_THROWS_WITH_AS(run_grid(config, model, {"ab"}), "insufficient corpus", RdhError);
}

TEST_CASE("trend checker flags violations and passes clean grids") {
    auto row = [](Strategy s, double tp, int ratio, double bpw, double ppl) {
        return MetricsRow{s, tp, ratio, bpw, ppl, 10};
    };
    std::vector<MetricsRow> clean;
    for (Strategy s : {Strategy::block, Strategy::huffman, Strategy::adg}) {
        double base = s == Strategy::huffman ? 1.3 : 1.2;
        for (double tp : {0.02, 0.03, 0.04}) {
            for (int ratio : {3, 4, 5}) {
                double bpw = base - tp * 10 + ratio * 0.05;
                double ppl = 200.0 - tp * 100 - ratio * 5;
                clean.push_back(row(s, tp, ratio, bpw, ppl));
            }
        }
    }
    TrendReport good = check_trends(clean);
    CHECK(good.bpw_decreasing_in_tp);
    CHECK(good.bpw_increasing_in_ratio);
    CHECK(good.huffman_ge_block);
    CHECK(good.ppl_nonincreasing_in_tp);
    CHECK(good.ppl_nonincreasing_in_ratio);
    CHECK(good.flags.empty());

    std::vector<MetricsRow> broken = clean;
    // block at (tp=0.03, ratio=3) jumps above (tp=0.02, ratio=3)
    broken[3].mean_bpw = broken[0].mean_bpw + 1.0;
    TrendReport bad = check_trends(broken);
    CHECK(!bad.bpw_decreasing_in_tp);
    CHECK(!bad.flags.empty());

    std::string json = trend_report_json(bad);
    CHECK(json.find("\"flags\": [\"") != std::string::npos);
}
