#include "hanforge/cli.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hanforge/baselines.hpp"
#include "hanforge/data.hpp"
#include "hanforge/encoders.hpp"
#include "hanforge/metrics.hpp"
#include "hanforge/model_io.hpp"
#include "hanforge/training.hpp"
#include "hanforge/viz.hpp"

namespace hanforge::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
    std::string command;
    std::string data, val, test, embeddings, model, out = "out";
    std::string variant = "v1";
    std::string scenario = "all";
    std::string placement = "mixed";
    std::string format = "auto";
    std::uint64_t seed = 42;
    std::size_t n = 200;
    std::size_t batch_size = 64;
    std::size_t epochs = 10;
    std::size_t max_words = 64;
    std::size_t max_sentences = 64;
    std::size_t hidden_size = 50;
    std::size_t embedding_dim = 100;
    std::size_t max_vocab = 65510;
    std::size_t top_k = 5;
    std::size_t patience = 3;
    std::size_t threads = 1;
    std::size_t limit = 0;
    double lr = 1e-3;
    double dropout = 0.5;
    double trigger_rate = 0.3;
    double test_fraction = 1.0 / 3.0;
    double threshold = 0.5;
    double target_accuracy = 0.0;
};

json config_to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["data"] = c.data;
    j["val"] = c.val;
    j["test"] = c.test;
    j["embeddings"] = c.embeddings;
    j["model"] = c.model;
    j["out"] = c.out;
    j["variant"] = c.variant;
    j["scenario"] = c.scenario;
    j["placement"] = c.placement;
    j["format"] = c.format;
    j["seed"] = c.seed;
    j["n"] = c.n;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["max_words"] = c.max_words;
    j["max_sentences"] = c.max_sentences;
    j["hidden_size"] = c.hidden_size;
    j["embedding_dim"] = c.embedding_dim;
    j["max_vocab"] = c.max_vocab;
    j["top_k"] = c.top_k;
    j["patience"] = c.patience;
    j["threads"] = c.threads;
    j["limit"] = c.limit;
    j["lr"] = c.lr;
    j["dropout"] = c.dropout;
    j["trigger_rate"] = c.trigger_rate;
    j["test_fraction"] = c.test_fraction;
    j["threshold"] = c.threshold;
    j["target_accuracy"] = c.target_accuracy;
    return j;
}

void apply_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
    auto s = [&j](const char* key, std::string& out) { if (j.contains(key)) out = j[key].get<std::string>(); };
    auto u = [&j](const char* key, auto& out) { if (j.contains(key)) out = j[key].template get<std::decay_t<decltype(out)>>(); };
    s("data", c.data); s("val", c.val); s("test", c.test);
    s("embeddings", c.embeddings); s("model", c.model); s("out", c.out);
    s("variant", c.variant); s("scenario", c.scenario); s("placement", c.placement);
    s("format", c.format);
    u("seed", c.seed); u("n", c.n); u("batch_size", c.batch_size); u("epochs", c.epochs);
    u("max_words", c.max_words); u("max_sentences", c.max_sentences);
    u("hidden_size", c.hidden_size); u("embedding_dim", c.embedding_dim);
    u("max_vocab", c.max_vocab); u("top_k", c.top_k); u("patience", c.patience);
    u("threads", c.threads); u("limit", c.limit);
    u("lr", c.lr); u("dropout", c.dropout); u("trigger_rate", c.trigger_rate);
    u("test_fraction", c.test_fraction); u("threshold", c.threshold);
    u("target_accuracy", c.target_accuracy);
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

fs::path ensure_outdir(const RunConfig& c) {
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + c.out + "': " + ec.message());
    return dir;
}

// config echo + seed + version; no timestamps, so repeated runs are
// byte-identical
void write_manifest(const RunConfig& c, const fs::path& dir) {
    json j;
    j["version"] = kVersion;
    j["command"] = c.command;
    j["seed"] = c.seed;
    j["config"] = config_to_json(c);
    write_text_file(dir / "run_manifest.json", j.dump(2) + "\n");
}

void require_input(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("missing required input: ") + what);
    if (!fs::exists(path))
        throw ValidationError(std::string(what) + " path '" + path + "' does not exist");
}

data::DatasetFormat detect_format(const RunConfig& c, const std::string& path) {
    if (c.format == "jsonl") return data::DatasetFormat::jsonl;
    if (c.format == "csv") return data::DatasetFormat::csv;
    if (c.format == "auto")
        return fs::path(path).extension() == ".csv" ? data::DatasetFormat::csv
                                                    : data::DatasetFormat::jsonl;
    throw ConfigError("unknown --format '" + c.format + "', expected auto|jsonl|csv");
}

std::vector<data::Article> load_articles(const RunConfig& c, const std::string& path,
                                         const char* what) {
    require_input(path, what);
    auto result = data::load_dataset(path, detect_format(c, path));
    for (const auto& issue : result.rejected)
        std::cerr << "rejected record (line " << issue.line << ", uid '" << issue.uid
                  << "'): " << issue.reason << "\n";
    if (result.articles.empty())
        throw ValidationError(std::string(what) + " '" + path + "' contains no usable records");
    return std::move(result.articles);
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char ch : name)
        out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
    return out.empty() ? "article" : out;
}

std::vector<double> parallel_scores(const encoders::HanModel& model,
                                    const std::vector<data::TokenizedArticle>& articles,
                                    std::size_t threads) {
    threads = resolve_threads(threads);
    if (threads <= 1 || articles.size() < 2) return training::score_articles(model, articles);
    std::vector<double> scores(articles.size(), 0.5);
    std::vector<std::thread> pool;
    std::size_t chunk = (articles.size() + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(articles.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&model, &articles, &scores, begin, end] {
            for (std::size_t i = begin; i < end; ++i) {
                const auto& t = articles[i];
                bool ok = model.variant == encoders::Variant::v1
                              ? (!t.title_ids.empty() || !t.body_ids.empty())
                              : (!t.title_ids.empty() && !t.body_ids.empty());
                if (!ok) continue;
                auto enc = encoders::encode_article(model, t.title_ids, t.body_ids);
                scores[i] = encoders::classify(model, enc.vec)[1];
            }
        });
    }
    for (auto& th : pool) th.join();
    return scores;
}

void write_scores_csv(const fs::path& path, const std::vector<data::TokenizedArticle>& articles,
                      const std::vector<double>& scores) {
    std::ostringstream out;
    out.precision(17);
    out << "uid,score,label\n";
    for (std::size_t i = 0; i < articles.size(); ++i)
        out << articles[i].uid << "," << scores[i] << "," << articles[i].label << "\n";
    write_text_file(path, out.str());
}

int cmd_synth(const RunConfig& c) {
    training::SynthOptions opts;
    opts.test_fraction = c.test_fraction;
    if (c.placement == "title") opts.placement = training::TriggerPlacement::title;
    else if (c.placement == "body") opts.placement = training::TriggerPlacement::body;
    else if (c.placement == "mixed") opts.placement = training::TriggerPlacement::mixed;
    else throw ConfigError("unknown --placement '" + c.placement + "', expected mixed|title|body");

    auto corpus = training::make_synthetic_corpus(c.n, c.trigger_rate, c.seed, opts);
    fs::path dir = ensure_outdir(c);
    data::save_dataset_jsonl(corpus.train, (dir / "train.jsonl").string());
    if (!corpus.test.empty()) data::save_dataset_jsonl(corpus.test, (dir / "test.jsonl").string());
    write_manifest(c, dir);
    std::cout << "synth: wrote " << corpus.train.size() << " train / " << corpus.test.size()
              << " test articles to " << dir.string() << "\n";
    return 0;
}

int cmd_build_vocab(const RunConfig& c) {
    auto articles = load_articles(c, c.data, "--data");
    auto vocab = data::build_vocab(articles, c.max_vocab);
    fs::path dir = ensure_outdir(c);
    data::save_vocab(vocab, (dir / "vocab.txt").string());
    write_manifest(c, dir);
    std::cout << "build-vocab: " << vocab.size() << " entries (incl. <pad>, <unk>)\n";
    return 0;
}

int cmd_train(const RunConfig& c) {
    auto articles = load_articles(c, c.data, "--data");

    std::vector<data::Article> val_articles;
    if (!c.val.empty()) {
        val_articles = load_articles(c, c.val, "--val");
    } else if (c.patience > 0 && articles.size() >= 20) {
        // deterministic 10% holdout for early stopping
        RngState rng(c.seed ^ 0x5eedull);
        std::vector<std::size_t> order(articles.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);
        std::size_t n_val = articles.size() / 10;
        std::vector<data::Article> train_part;
        for (std::size_t k = 0; k < order.size(); ++k)
            (k < n_val ? val_articles : train_part).push_back(std::move(articles[order[k]]));
        articles = std::move(train_part);
    }

    auto vocab = data::build_vocab(articles, c.max_vocab);

    encoders::HyperParams hyper;
    hyper.max_words_per_sentence = c.max_words;
    hyper.max_sentences_per_doc = c.max_sentences;
    hyper.embedding_dim = c.embedding_dim;
    hyper.hidden_size = c.hidden_size;
    hyper.dropout_rate = c.dropout;

    std::optional<data::PretrainedEmbeddings> pretrained;
    if (!c.embeddings.empty()) {
        require_input(c.embeddings, "--embeddings");
        pretrained = data::load_pretrained(c.embeddings);
        hyper.embedding_dim = pretrained->dimension;
    }

    RngState rng(c.seed);
    auto model = encoders::init_model(encoders::variant_from_name(c.variant), hyper, vocab.size(), rng);
    if (pretrained) model.embedding = data::build_embedding_matrix(vocab, *pretrained, rng);

    auto train_tok = data::tokenize_articles(articles, vocab, hyper);
    auto val_tok = data::tokenize_articles(val_articles, vocab, hyper);

    training::TrainConfig tc;
    tc.batch_size = c.batch_size;
    tc.epochs = c.epochs;
    tc.lr = c.lr;
    tc.seed = c.seed;
    tc.early_stop_patience = c.patience;
    tc.target_train_accuracy = c.target_accuracy;

    auto report = training::train(model, train_tok, val_tok, tc);

    fs::path dir = ensure_outdir(c);
    model_io::save_model(model, vocab, (dir / "model.bin").string());
    data::save_vocab(vocab, (dir / "vocab.txt").string());
    write_text_file(dir / "train_report.json", training::report_to_json(report) + "\n");
    write_text_file(dir / "train_state.json",
                    training::train_state_to_json(report.final_adam, report.epochs.size(), c.seed) + "\n");
    write_manifest(c, dir);

    if (report.aborted_nonfinite)
        std::cerr << "train: aborted on non-finite loss; last good checkpoint written\n";
    std::cout << "train: " << report.epochs.size() << " epochs";
    if (!report.epochs.empty())
        std::cout << ", final loss " << report.epochs.back().train_loss << ", train accuracy "
                  << report.epochs.back().train_accuracy;
    std::cout << "\n";
    return report.aborted_nonfinite ? 2 : 0;
}

int cmd_evaluate(const RunConfig& c) {
    require_input(c.model, "--model");
    auto loaded = model_io::load_model(c.model);
    auto articles = load_articles(c, c.data, "--data");
    auto tokenized = data::tokenize_articles(articles, loaded.vocab, loaded.model.hyper);

    std::vector<int> labels;
    for (const auto& t : tokenized) labels.push_back(t.label);
    auto scores = parallel_scores(loaded.model, tokenized, c.threads);
    auto eval = metrics::evaluate(scores, labels, c.threshold);

    fs::path dir = ensure_outdir(c);
    write_text_file(dir / "metrics.json", metrics::eval_to_json(eval) + "\n");
    write_text_file(dir / "roc_points.csv", metrics::points_to_csv(eval.roc_points, "fpr", "tpr"));
    write_text_file(dir / "pr_points.csv",
                    metrics::points_to_csv(eval.pr_points, "recall", "precision"));
    write_scores_csv(dir / "scores.csv", tokenized, scores);
    write_manifest(c, dir);
    std::cout << "evaluate: precision " << eval.precision << ", recall " << eval.recall
              << ", roc_auc " << eval.roc_auc << "\n";
    return 0;
}

int cmd_predict(const RunConfig& c) {
    require_input(c.model, "--model");
    auto loaded = model_io::load_model(c.model);
    auto articles = load_articles(c, c.data, "--data");
    auto tokenized = data::tokenize_articles(articles, loaded.vocab, loaded.model.hyper);
    auto scores = parallel_scores(loaded.model, tokenized, c.threads);

    fs::path dir = ensure_outdir(c);
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < tokenized.size(); ++i) {
        json j;
        j["uid"] = tokenized[i].uid;
        j["p_unreliable"] = scores[i];
        j["predicted_label"] = scores[i] >= c.threshold ? 1 : 0;
        out << j.dump() << "\n";
    }
    write_text_file(dir / "predictions.jsonl", out.str());
    write_manifest(c, dir);
    std::cout << "predict: scored " << tokenized.size() << " articles\n";
    return 0;
}

int cmd_baseline(const RunConfig& c) {
    auto train_articles = load_articles(c, c.data, "--data");
    auto test_articles = load_articles(c, c.test, "--test");

    baselines::LinearConfig lc;
    lc.epochs = c.epochs > 0 ? c.epochs : 200;
    auto results = baselines::evaluate_scenarios(train_articles, test_articles, lc);
    if (c.scenario != "all") {
        auto wanted = baselines::scenario_from_name(c.scenario);
        std::erase_if(results, [wanted](const auto& r) { return r.scenario != wanted; });
    }

    fs::path dir = ensure_outdir(c);
    write_text_file(dir / "baseline_table.csv", baselines::scenario_table_csv(results));
    write_text_file(dir / "baseline_table.json", baselines::scenario_table_json(results) + "\n");
    for (const auto& r : results) {
        std::ostringstream out;
        out.precision(17);
        out << "uid,score,label\n";
        for (std::size_t i = 0; i < test_articles.size(); ++i)
            out << test_articles[i].uid << "," << r.test_scores[i] << "," << test_articles[i].label
                << "\n";
        write_text_file(dir / ("baseline_scores_" + scenario_name(r.scenario) + ".csv"), out.str());
    }
    write_manifest(c, dir);
    std::cout << baselines::scenario_table_csv(results);
    return 0;
}

int cmd_visualize(const RunConfig& c) {
    require_input(c.model, "--model");
    auto loaded = model_io::load_model(c.model);
    auto articles = load_articles(c, c.data, "--data");
    auto tokenized = data::tokenize_articles(articles, loaded.vocab, loaded.model.hyper);

    fs::path dir = ensure_outdir(c);
    std::size_t limit = c.limit > 0 ? std::min(c.limit, tokenized.size()) : tokenized.size();
    std::size_t written = 0;
    for (std::size_t i = 0; i < limit; ++i) {
        const auto& t = tokenized[i];
        bool ok = loaded.model.variant == encoders::Variant::v1
                      ? (!t.title_ids.empty() || !t.body_ids.empty())
                      : (!t.title_ids.empty() && !t.body_ids.empty());
        if (!ok) {
            std::cerr << "visualize: skipping '" << t.uid << "' (variant cannot encode it)\n";
            continue;
        }
        auto enc = encoders::encode_article(loaded.model, t.title_ids, t.body_ids);
        double p = encoders::classify(loaded.model, enc.vec)[1];
        viz::attach_texts(enc.trace, t, loaded.vocab,
                          loaded.model.variant == encoders::Variant::v1 && !t.title_ids.empty());

        viz::HeatmapDocument doc;
        doc.uid = t.uid;
        doc.title = articles[i].title;
        doc.top_k = c.top_k;
        doc.predicted_unreliable = p;
        doc.label = t.label;

        std::string base = sanitize_filename(t.uid);
        viz::export_trace(enc.trace, t.uid, p, (dir / (base + "_trace.json")).string());
        write_text_file(dir / (base + ".html"), viz::render_heatmap(enc.trace, doc));
        ++written;
    }
    write_manifest(c, dir);
    std::cout << "visualize: wrote " << written << " heatmaps to " << dir.string() << "\n";
    return 0;
}

}  // namespace

std::size_t resolve_threads(std::size_t requested) {
    if (requested == 0) requested = 1;
    if (const char* env = std::getenv("HANFORGE_THREADS")) {
        char* end = nullptr;
        unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) requested = std::min<std::size_t>(requested, cap);
    }
    return requested;
}

int dispatch(const std::vector<std::string>& args) {
    RunConfig cfg;

    // the config file provides defaults; explicit flags override them
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
            try {
                apply_config_file(cfg, args[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }

    CLI::App app{"hierarchical attention networks for unreliable-news classification"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");

    auto add_common = [&cfg, &config_path](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--seed", cfg.seed, "random seed");
        // accepted everywhere; the value itself was consumed by the pre-scan
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic trigger corpus");
    synth->add_option("--n", cfg.n, "total article count");
    synth->add_option("--trigger-rate", cfg.trigger_rate, "unreliable fraction");
    synth->add_option("--test-fraction", cfg.test_fraction, "fraction held out as test split");
    synth->add_option("--placement", cfg.placement, "trigger placement: mixed|title|body");
    add_common(synth);

    CLI::App* build_vocab = app.add_subcommand("build-vocab", "build a vocabulary from a dataset");
    build_vocab->add_option("--data", cfg.data, "dataset path (jsonl or csv)")->required();
    build_vocab->add_option("--max-vocab", cfg.max_vocab, "vocabulary size cap");
    build_vocab->add_option("--format", cfg.format, "dataset format: auto|jsonl|csv");
    add_common(build_vocab);

    CLI::App* train = app.add_subcommand("train", "train a HAN variant");
    train->add_option("--data", cfg.data, "training dataset")->required();
    train->add_option("--val", cfg.val, "validation dataset (default: 10% holdout)");
    train->add_option("--variant", cfg.variant, "encoder variant: v1|v2");
    train->add_option("--embeddings", cfg.embeddings, "pretrained embeddings (GloVe text format)");
    train->add_option("--batch-size", cfg.batch_size, "mini-batch size");
    train->add_option("--epochs", cfg.epochs, "training epochs");
    train->add_option("--lr", cfg.lr, "Adam learning rate");
    train->add_option("--max-words", cfg.max_words, "max words per sentence");
    train->add_option("--max-sentences", cfg.max_sentences, "max sentences per document");
    train->add_option("--hidden-size", cfg.hidden_size, "GRU hidden size per direction");
    train->add_option("--embedding-dim", cfg.embedding_dim, "embedding dimension");
    train->add_option("--dropout", cfg.dropout, "dropout rate after attention layers");
    train->add_option("--max-vocab", cfg.max_vocab, "vocabulary size cap");
    train->add_option("--patience", cfg.patience, "early-stop patience in epochs (0 disables)");
    train->add_option("--target-accuracy", cfg.target_accuracy,
                      "stop once training accuracy reaches this (0 disables)");
    train->add_option("--format", cfg.format, "dataset format: auto|jsonl|csv");
    add_common(train);

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a trained model");
    evaluate->add_option("--data", cfg.data, "evaluation dataset")->required();
    evaluate->add_option("--model", cfg.model, "model checkpoint")->required();
    evaluate->add_option("--threshold", cfg.threshold, "decision threshold");
    evaluate->add_option("--threads", cfg.threads, "worker threads (capped by HANFORGE_THREADS)");
    evaluate->add_option("--format", cfg.format, "dataset format: auto|jsonl|csv");
    add_common(evaluate);

    CLI::App* predict = app.add_subcommand("predict", "score articles with a trained model");
    predict->add_option("--data", cfg.data, "dataset to score")->required();
    predict->add_option("--model", cfg.model, "model checkpoint")->required();
    predict->add_option("--threshold", cfg.threshold, "decision threshold");
    predict->add_option("--threads", cfg.threads, "worker threads (capped by HANFORGE_THREADS)");
    predict->add_option("--format", cfg.format, "dataset format: auto|jsonl|csv");
    add_common(predict);

    CLI::App* baseline = app.add_subcommand("baseline", "TF-IDF + logistic regression scenarios");
    baseline->add_option("--data", cfg.data, "training dataset")->required();
    baseline->add_option("--test", cfg.test, "test dataset")->required();
    baseline->add_option("--scenario", cfg.scenario,
                         "all|title|body|title_plus_body|title_concat_body");
    baseline->add_option("--epochs", cfg.epochs, "gradient-descent epochs for the linear model");
    baseline->add_option("--format", cfg.format, "dataset format: auto|jsonl|csv");
    add_common(baseline);

    CLI::App* visualize = app.add_subcommand("visualize", "emit attention heatmaps");
    visualize->add_option("--data", cfg.data, "dataset to visualize")->required();
    visualize->add_option("--model", cfg.model, "model checkpoint")->required();
    visualize->add_option("--top-k", cfg.top_k, "sentences shown per article");
    visualize->add_option("--limit", cfg.limit, "articles to render (0 = all)");
    visualize->add_option("--format", cfg.format, "dataset format: auto|jsonl|csv");
    add_common(visualize);

    std::vector<const char*> argv;
    argv.push_back("hanforge");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    }

    try {
        if (synth->parsed()) { cfg.command = "synth"; return cmd_synth(cfg); }
        if (build_vocab->parsed()) { cfg.command = "build-vocab"; return cmd_build_vocab(cfg); }
        if (train->parsed()) { cfg.command = "train"; return cmd_train(cfg); }
        if (evaluate->parsed()) { cfg.command = "evaluate"; return cmd_evaluate(cfg); }
        if (predict->parsed()) { cfg.command = "predict"; return cmd_predict(cfg); }
        if (baseline->parsed()) { cfg.command = "baseline"; return cmd_baseline(cfg); }
        if (visualize->parsed()) { cfg.command = "visualize"; return cmd_visualize(cfg); }
        std::cerr << app.help() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {  // DimensionError, ConfigError
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace hanforge::cli
