#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hanforge/baselines.hpp"
#include "hanforge/cli.hpp"
#include "hanforge/data.hpp"
#include "hanforge/encoders.hpp"
#include "hanforge/metrics.hpp"
#include "hanforge/model_io.hpp"
#include "hanforge/training.hpp"
#include "hanforge/viz.hpp"

namespace py = pybind11;

using namespace hanforge;

namespace {

Tensor vector_from_list(const std::vector<double>& values) {
    Tensor t = Tensor::vector(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) t[i] = values[i];
    return t;
}

std::vector<double> vector_to_list(const Tensor& t) {
    return std::vector<double>(t.data(), t.data() + t.size());
}

data::Article article_from_dict(const py::dict& d) {
    data::Article a;
    a.uid = py::cast<std::string>(d["uid"]);
    a.title = py::cast<std::string>(d["title"]);
    a.text = py::cast<std::string>(d["text"]);
    if (d.contains("normalizedText"))
        a.normalized_text = py::cast<std::string>(d["normalizedText"]);
    a.label = py::cast<int>(d["label"]);
    return a;
}

py::dict article_to_dict(const data::Article& a) {
    py::dict d;
    d["uid"] = a.uid;
    d["title"] = a.title;
    d["text"] = a.text;
    if (a.normalized_text) d["normalizedText"] = *a.normalized_text;
    d["label"] = a.label;
    return d;
}

// A trained model plus its vocabulary and preprocessing settings, the unit
// the Python surface works with.
struct Pipeline {
    encoders::HanModel model;
    data::Vocabulary vocab;

    double predict_score(const std::string& title, const std::string& text) const {
        data::Article a;
        a.uid = "py";
        a.title = title;
        a.text = text;
        auto tok = data::tokenize_article(a, vocab, model.hyper);
        auto enc = encoders::encode_article(model, tok.title_ids, tok.body_ids);
        return encoders::classify(model, enc.vec)[1];
    }

    py::dict trace(const std::string& title, const std::string& text) const {
        data::Article a;
        a.uid = "py";
        a.title = title;
        a.text = text;
        auto tok = data::tokenize_article(a, vocab, model.hyper);
        auto enc = encoders::encode_article(model, tok.title_ids, tok.body_ids);
        double p = encoders::classify(model, enc.vec)[1];
        viz::attach_texts(enc.trace, tok, vocab,
                          model.variant == encoders::Variant::v1 && !tok.title_ids.empty());
        py::dict out;
        out["prediction"] = p;
        py::list sentences;
        for (std::size_t s = 0; s < enc.trace.word_weights.size(); ++s) {
            py::dict sent;
            sent["tokens"] = s < enc.trace.sentence_texts.size() ? enc.trace.sentence_texts[s]
                                                                 : std::vector<std::string>{};
            sent["weights"] = vector_to_list(enc.trace.word_weights[s]);
            sentences.append(sent);
        }
        out["sentences"] = sentences;
        out["sentence_weights"] = vector_to_list(enc.trace.sentence_weights);
        if (enc.trace.has_article_weights) {
            out["title_weight"] = enc.trace.title_weight;
            out["body_weight"] = enc.trace.body_weight;
        }
        return out;
    }
};

Pipeline train_pipeline(const std::vector<py::dict>& records, const std::string& variant,
                        std::size_t epochs, std::size_t hidden_size, std::size_t embedding_dim,
                        double lr, std::size_t batch_size, double dropout, std::uint64_t seed) {
    std::vector<data::Article> articles;
    articles.reserve(records.size());
    for (const auto& d : records) articles.push_back(article_from_dict(d));

    encoders::HyperParams hyper;
    hyper.hidden_size = hidden_size;
    hyper.embedding_dim = embedding_dim;
    hyper.dropout_rate = dropout;

    Pipeline p;
    p.vocab = data::build_vocab(articles);
    RngState rng(seed);
    p.model = encoders::init_model(encoders::variant_from_name(variant), hyper, p.vocab.size(), rng);

    training::TrainConfig tc;
    tc.epochs = epochs;
    tc.lr = lr;
    tc.batch_size = batch_size;
    tc.seed = seed;
    tc.early_stop_patience = 0;
    auto tokenized = data::tokenize_articles(articles, p.vocab, hyper);
    training::train(p.model, tokenized, {}, tc);
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hierarchical attention networks for unreliable-news classification";
    m.attr("__version__") = cli::kVersion;

    m.def(
        "softmax",
        [](const std::vector<double>& v) { return vector_to_list(softmax(vector_from_list(v))); },
        py::arg("values"), "Max-subtracted softmax over a list of floats.");
    m.def(
        "matvec",
        [](const std::vector<std::vector<double>>& m_rows, const std::vector<double>& v) {
            if (m_rows.empty()) throw DomainError("matvec: empty matrix");
            Tensor m_t = Tensor::matrix(m_rows.size(), m_rows[0].size());
            for (std::size_t r = 0; r < m_rows.size(); ++r) {
                if (m_rows[r].size() != m_t.cols())
                    throw DimensionError("matvec: ragged matrix rows");
                for (std::size_t c = 0; c < m_t.cols(); ++c) m_t.at(r, c) = m_rows[r][c];
            }
            return vector_to_list(matvec(m_t, vector_from_list(v)));
        },
        py::arg("matrix"), py::arg("vector"));

    m.def("split_sentences", &data::split_sentences, py::arg("text"));
    m.def("tokenize_words", &data::tokenize_words, py::arg("sentence"));

    m.def("roc_auc", &metrics::roc_auc, py::arg("scores"), py::arg("labels"),
          "Rank-statistic ROC-AUC; ties count half.");
    m.def(
        "confusion_at",
        [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
            auto c = metrics::confusion_at(scores, labels, threshold);
            return py::make_tuple(c.tp, c.fp, c.tn, c.fn);
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
    m.def(
        "auto_class_weights",
        [](const std::vector<int>& labels) {
            auto w = training::auto_class_weights(labels);
            return py::make_tuple(w.weights[0], w.weights[1]);
        },
        py::arg("labels"), "Balanced class weights w_c = N / (2 N_c).");

    m.def(
        "make_synthetic_corpus",
        [](std::size_t n, double trigger_rate, std::uint64_t seed, double test_fraction,
           const std::string& placement) {
            training::SynthOptions opts;
            opts.test_fraction = test_fraction;
            if (placement == "title") opts.placement = training::TriggerPlacement::title;
            else if (placement == "body") opts.placement = training::TriggerPlacement::body;
            auto corpus = training::make_synthetic_corpus(n, trigger_rate, seed, opts);
            py::list train, test;
            for (const auto& a : corpus.train) train.append(article_to_dict(a));
            for (const auto& a : corpus.test) test.append(article_to_dict(a));
            return py::make_tuple(train, test);
        },
        py::arg("n"), py::arg("trigger_rate") = 0.3, py::arg("seed") = 42,
        py::arg("test_fraction") = 1.0 / 3.0, py::arg("placement") = "mixed");

    py::class_<Pipeline>(m, "Pipeline", "A trained HAN model with its vocabulary.")
        .def("predict_score", &Pipeline::predict_score, py::arg("title"), py::arg("text"),
             "p(unreliable) for one article.")
        .def("trace", &Pipeline::trace, py::arg("title"), py::arg("text"),
             "Attention weights for one article.")
        .def(
            "save",
            [](const Pipeline& p, const std::string& path) {
                model_io::save_model(p.model, p.vocab, path);
            },
            py::arg("path"))
        .def_static(
            "load",
            [](const std::string& path) {
                auto loaded = model_io::load_model(path);
                return Pipeline{std::move(loaded.model), std::move(loaded.vocab)};
            },
            py::arg("path"));

    m.def("train_pipeline", &train_pipeline, py::arg("articles"), py::arg("variant") = "v1",
          py::arg("epochs") = 5, py::arg("hidden_size") = 16, py::arg("embedding_dim") = 16,
          py::arg("lr") = 1e-3, py::arg("batch_size") = 64, py::arg("dropout") = 0.5,
          py::arg("seed") = 42,
          "Build vocabulary, initialize and train a model over article dicts.");

    m.def("cli", &cli::dispatch, py::arg("args"), "Run the command-line interface in-process.");
}
