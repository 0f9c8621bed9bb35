#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "hanforge/cli.hpp"
#include "hanforge/training.hpp"
#include "hanforge/viz.hpp"

using namespace hanforge;
using namespace hanforge::viz;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

encoders::AttentionTrace sample_trace() {
    encoders::AttentionTrace t;
    t.word_weights.push_back([] {
        Tensor w = Tensor::vector(3);
        w[0] = 0.6;
        w[1] = 0.3;
        w[2] = 0.1;
        return w;
    }());
    t.word_weights.push_back([] {
        Tensor w = Tensor::vector(2);
        w[0] = 0.45;
        w[1] = 0.55;
        return w;
    }());
    t.sentence_weights = Tensor::vector(2);
    t.sentence_weights[0] = 0.7;
    t.sentence_weights[1] = 0.3;
    t.sentence_texts = {{"shocking", "claim", "!"}, {"more", "text"}};
    t.has_article_weights = true;
    t.title_weight = 0.8;
    t.body_weight = 0.2;
    t.title_tokens = {"shocking", "news"};
    t.title_word_weights = Tensor::vector(2);
    t.title_word_weights[0] = 0.9;
    t.title_word_weights[1] = 0.1;
    return t;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

}  // namespace

TEST_CASE("trace JSON round trip preserves weights exactly") {
    auto trace = sample_trace();
    std::string j = trace_to_json(trace, "t-1", 0.875);
    std::string uid;
    double prediction = 0;
    auto back = trace_from_json(j, &uid, &prediction);
    CHECK(uid == "t-1");
    CHECK(prediction == 0.875);
    REQUIRE(back.word_weights.size() == trace.word_weights.size());
    for (std::size_t s = 0; s < back.word_weights.size(); ++s)
        for (std::size_t k = 0; k < back.word_weights[s].size(); ++k)
            CHECK(back.word_weights[s][k] == trace.word_weights[s][k]);
    CHECK(back.sentence_weights == trace.sentence_weights);
    CHECK(back.sentence_texts == trace.sentence_texts);
    CHECK(back.has_article_weights);
    CHECK(back.title_weight == trace.title_weight);
    CHECK(back.body_weight == trace.body_weight);
    CHECK(j.find("schema_version") != std::string::npos);
}

TEST_CASE("export_trace writes a loadable file") {
    TempDir dir("hanforge_viz_test");
    auto trace = sample_trace();
    export_trace(trace, "t-2", 0.25, dir.str("trace.json"));
    auto back = trace_from_json(slurp(dir.str("trace.json")));
    CHECK(back.sentence_weights == trace.sentence_weights);
    double sum = 0;
    for (std::size_t i = 0; i < back.sentence_weights.size(); ++i)
        sum += back.sentence_weights[i];
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("render_heatmap structure and embedded JSON round trip") {
    auto trace = sample_trace();
    HeatmapDocument doc;
    doc.uid = "t-3";
    doc.title = "Shocking <news> & claims";
    doc.top_k = 5;
    doc.predicted_unreliable = 0.9;
    doc.label = 1;

    std::string html = render_heatmap(trace, doc);
    CHECK(html.find("<!DOCTYPE html>") == 0);
    CHECK(html.find("Shocking &lt;news&gt; &amp; claims") != std::string::npos);
    CHECK(html.find("http://") == std::string::npos);  // self-contained, no network fetches
    CHECK(html.find("https://") == std::string::npos);

    auto embedded = trace_from_json(extract_embedded_json(html));
    for (std::size_t s = 0; s < embedded.word_weights.size(); ++s)
        for (std::size_t k = 0; k < embedded.word_weights[s].size(); ++k)
            CHECK(std::abs(embedded.word_weights[s][k] - trace.word_weights[s][k]) < 1e-9);

    CHECK_THROWS_AS(render_heatmap(encoders::AttentionTrace{}, doc), DomainError);
}

TEST_CASE("render_heatmap single fully saturated cell") {
    encoders::AttentionTrace t;
    Tensor w = Tensor::vector(1);
    w[0] = 1.0;
    t.word_weights.push_back(w);
    t.sentence_weights = Tensor::vector(1);
    t.sentence_weights[0] = 1.0;
    t.sentence_texts = {{"alone"}};
    HeatmapDocument doc;
    doc.uid = "one";
    doc.title = "one";
    std::string html = render_heatmap(t, doc);
    CHECK(html.find("background:rgba(217,48,37,1)") != std::string::npos);
}

TEST_CASE("render_heatmap keeps top-5 sentences in weight order and shading is monotone") {
    encoders::AttentionTrace t;
    double weights[6] = {0.05, 0.3, 0.1, 0.25, 0.2, 0.1};
    t.sentence_weights = Tensor::vector(6);
    for (int s = 0; s < 6; ++s) {
        t.sentence_weights[s] = weights[s];
        Tensor w = Tensor::vector(1);
        w[0] = 1.0;
        t.word_weights.push_back(w);
        t.sentence_texts.push_back({"sent" + std::to_string(s)});
    }
    HeatmapDocument doc;
    doc.uid = "six";
    doc.title = "six";
    doc.top_k = 5;
    std::string full = render_heatmap(t, doc);
    // the embedded JSON block carries the complete trace; the rendered rows
    // stop at top-k, so inspect only the markup before the script tag
    std::string html = full.substr(0, full.find("<script"));
    CHECK(extract_embedded_json(full).find("sent0") != std::string::npos);

    // exactly five rendered sentence rows, highest weight first, lowest absent
    CHECK(html.find("sent0") == std::string::npos);
    std::size_t p1 = html.find("sent1");
    std::size_t p3 = html.find("sent3");
    std::size_t p4 = html.find("sent4");
    REQUIRE(p1 != std::string::npos);
    REQUIRE(p3 != std::string::npos);
    REQUIRE(p4 != std::string::npos);
    CHECK(p1 < p3);
    CHECK(p3 < p4);

    // bar opacity is monotone in sentence weight: extract and compare
    std::regex bar_re("background:rgba\\(26,115,232,([0-9.e+-]+)\\)");
    std::vector<double> opacities;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), bar_re);
         it != std::sregex_iterator(); ++it)
        opacities.push_back(std::stod((*it)[1]));
    REQUIRE(opacities.size() == 5);
    for (std::size_t i = 1; i < opacities.size(); ++i) CHECK(opacities[i - 1] >= opacities[i]);
}

TEST_CASE("resolve_threads honors the environment cap") {
    unsetenv("HANFORGE_THREADS");
    CHECK(cli::resolve_threads(4) == 4);
    CHECK(cli::resolve_threads(0) == 1);
    setenv("HANFORGE_THREADS", "2", 1);
    CHECK(cli::resolve_threads(8) == 2);
    CHECK(cli::resolve_threads(1) == 1);
    unsetenv("HANFORGE_THREADS");
}

TEST_CASE("cli usage and unknown flags") {
    CHECK(cli::dispatch({}) == 1);
    CHECK(cli::dispatch({"no-such-command"}) == 1);
    CHECK(cli::dispatch({"synth", "--no-such-flag"}) == 1);
    CHECK(cli::dispatch({"--help"}) == 0);
    CHECK(cli::dispatch({"train"}) == 1);  // missing required --data
}

TEST_CASE("cli synth is byte-deterministic") {
    // the same invocation twice produces byte-identical files
    TempDir d1("hanforge_cli_synth1");
    std::vector<std::string> args = {"synth", "--n", "40", "--seed", "7", "--out", d1.str()};
    CHECK(cli::dispatch(args) == 0);
    std::string train1 = slurp(d1.str("train.jsonl"));
    std::string test1 = slurp(d1.str("test.jsonl"));
    std::string manifest1 = slurp(d1.str("run_manifest.json"));
    CHECK(cli::dispatch(args) == 0);
    CHECK(slurp(d1.str("train.jsonl")) == train1);
    CHECK(slurp(d1.str("test.jsonl")) == test1);
    CHECK(slurp(d1.str("run_manifest.json")) == manifest1);
    CHECK(manifest1.find("\"version\"") != std::string::npos);
    CHECK(manifest1.find("\"seed\"") != std::string::npos);
}

TEST_CASE("cli full pipeline: synth, build-vocab, train, evaluate, predict, baseline, visualize") {
    TempDir data_dir("hanforge_cli_data");
    TempDir run_dir("hanforge_cli_run");
    REQUIRE(cli::dispatch({"synth", "--n", "90", "--seed", "11", "--out", data_dir.str()}) == 0);

    CHECK(cli::dispatch({"build-vocab", "--data", data_dir.str("train.jsonl"), "--out",
                         run_dir.str()}) == 0);
    CHECK(fs::exists(run_dir.str("vocab.txt")));

    // tiny model settings keep the unit suite quick
    REQUIRE(cli::dispatch({"train", "--data", data_dir.str("train.jsonl"), "--variant", "v1",
                           "--epochs", "2", "--hidden-size", "4", "--embedding-dim", "8",
                           "--batch-size", "8", "--seed", "3", "--out", run_dir.str()}) == 0);
    CHECK(fs::exists(run_dir.str("model.bin")));
    CHECK(fs::exists(run_dir.str("train_report.json")));
    CHECK(fs::exists(run_dir.str("train_state.json")));
    CHECK(fs::exists(run_dir.str("run_manifest.json")));

    TempDir eval_dir("hanforge_cli_eval");
    CHECK(cli::dispatch({"evaluate", "--data", data_dir.str("test.jsonl"), "--model",
                         run_dir.str("model.bin"), "--out", eval_dir.str()}) == 0);
    CHECK(fs::exists(eval_dir.str("metrics.json")));
    CHECK(fs::exists(eval_dir.str("roc_points.csv")));
    CHECK(fs::exists(eval_dir.str("pr_points.csv")));
    CHECK(fs::exists(eval_dir.str("scores.csv")));

    TempDir pred_dir("hanforge_cli_pred");
    CHECK(cli::dispatch({"predict", "--data", data_dir.str("test.jsonl"), "--model",
                         run_dir.str("model.bin"), "--out", pred_dir.str()}) == 0);
    std::string preds = slurp(pred_dir.str("predictions.jsonl"));
    CHECK(preds.find("p_unreliable") != std::string::npos);

    TempDir base_dir("hanforge_cli_base");
    CHECK(cli::dispatch({"baseline", "--data", data_dir.str("train.jsonl"), "--test",
                         data_dir.str("test.jsonl"), "--out", base_dir.str()}) == 0);
    std::string table = slurp(base_dir.str("baseline_table.csv"));
    CHECK(table.find("title_concat_body") != std::string::npos);
    CHECK(fs::exists(base_dir.str("baseline_scores_title.csv")));

    TempDir viz_dir("hanforge_cli_viz");
    CHECK(cli::dispatch({"visualize", "--data", data_dir.str("test.jsonl"), "--model",
                         run_dir.str("model.bin"), "--out", viz_dir.str(), "--limit", "3",
                         "--top-k", "4"}) == 0);
    std::size_t html_count = 0, trace_count = 0;
    for (const auto& entry : fs::directory_iterator(viz_dir.path)) {
        auto name = entry.path().filename().string();
        if (name.size() > 5 && name.substr(name.size() - 5) == ".html") ++html_count;
        if (name.find("_trace.json") != std::string::npos) ++trace_count;
    }
    CHECK(html_count == 3);
    CHECK(trace_count == 3);

    // evaluate on a missing path fails validation, not at runtime
    CHECK(cli::dispatch({"evaluate", "--data", "/nonexistent/x.jsonl", "--model",
                         run_dir.str("model.bin"), "--out", eval_dir.str()}) == 1);
}

TEST_CASE("cli config file provides defaults and flags override") {
    TempDir dir("hanforge_cli_cfg");
    {
        std::ofstream cfg(dir.str("config.json"));
        cfg << R"({"n": 24, "seed": 5, "out": ")" << dir.str("from_config") << R"("})";
    }
    CHECK(cli::dispatch({"synth", "--config", dir.str("config.json")}) == 0);
    CHECK(fs::exists(dir.str("from_config/train.jsonl")));

    // flag overrides the config's output directory
    CHECK(cli::dispatch({"synth", "--config", dir.str("config.json"), "--out",
                         dir.str("flag_wins")}) == 0);
    CHECK(fs::exists(dir.str("flag_wins/train.jsonl")));
}
