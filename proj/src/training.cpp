#include "hanforge/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "hanforge/metrics.hpp"

namespace hanforge::training {

namespace {

using nlohmann::json;

constexpr double kProbFloor = 1e-12;

bool encodable(const encoders::HanModel& model, const data::TokenizedArticle& t) {
    if (model.variant == encoders::Variant::v1) return !t.title_ids.empty() || !t.body_ids.empty();
    return !t.title_ids.empty() && !t.body_ids.empty();
}

struct ModelSnapshot {
    std::vector<Tensor> tensors;
};

ModelSnapshot snapshot(const encoders::HanModel& model) {
    ModelSnapshot s;
    for (const auto& ref : encoders::parameter_refs(model)) s.tensors.push_back(*ref.tensor);
    return s;
}

void restore(encoders::HanModel& model, const ModelSnapshot& s) {
    auto refs = encoders::parameter_refs(model);
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].tensor = s.tensors[i];
}

void zero_pad_row(encoders::HanModel& model) {
    for (std::size_t c = 0; c < model.embedding.dim(); ++c) model.embedding.weights.at(0, c) = 0.0;
}

}  // namespace

CrossEntropyResult weighted_cross_entropy(const Tensor& probs, int label,
                                          const std::array<double, 2>& class_weights) {
    if (probs.size() != 2) throw DimensionError("weighted_cross_entropy: expected 2 class probabilities, got " + probs.shape_str());
    if (label != 0 && label != 1)
        throw DomainError("weighted_cross_entropy: label must be 0 or 1, got " + std::to_string(label));
    double w = class_weights[static_cast<std::size_t>(label)];
    CrossEntropyResult res;
    double p = probs[static_cast<std::size_t>(label)];
    if (p < kProbFloor) {
        p = kProbFloor;
        res.clamped = true;
    }
    res.loss = -w * std::log(p);
    res.d_logits = Tensor::vector(2);
    res.d_logits[0] = w * (probs[0] - (label == 0 ? 1.0 : 0.0));
    res.d_logits[1] = w * (probs[1] - (label == 1 ? 1.0 : 0.0));
    return res;
}

AutoWeights auto_class_weights(const std::vector<int>& labels) {
    long long n0 = 0, n1 = 0;
    for (int l : labels) (l == 1 ? n1 : n0) += 1;
    if (n0 == 0 || n1 == 0)
        throw DomainError("auto_class_weights: both classes must be present (counts " +
                          std::to_string(n0) + "/" + std::to_string(n1) + ")");
    long long n = n0 + n1;
    AutoWeights w;
    w.num = {n, n};
    w.den = {2 * n0, 2 * n1};
    w.weights = {static_cast<double>(n) / static_cast<double>(2 * n0),
                 static_cast<double>(n) / static_cast<double>(2 * n1)};
    return w;
}

AdamState adam_init(const std::vector<encoders::NamedTensorRef>& params, double lr) {
    AdamState s;
    s.lr = lr;
    for (const auto& ref : params) {
        s.names.push_back(ref.name);
        Tensor zero = *ref.tensor;
        zero.fill(0.0);
        s.m.push_back(zero);
        s.v.push_back(std::move(zero));
    }
    return s;
}

void adam_update(AdamState& state, const std::vector<encoders::NamedTensorRef>& params,
                 const std::vector<encoders::NamedTensorRef>& grads) {
    if (params.size() != state.names.size() || grads.size() != params.size())
        throw DimensionError("adam_update: parameter/gradient/moment lists differ in length");
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k].tensor;
        const Tensor& g = *grads[k].tensor;
        if (!g.all_finite())
            throw DomainError("adam_update: non-finite gradient in tensor '" + params[k].name + "'");
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

std::string train_state_to_json(const AdamState& state, std::size_t epoch, std::uint64_t seed) {
    json j;
    j["schema_version"] = 1;
    j["step"] = state.step;
    j["epoch"] = epoch;
    j["seed"] = seed;
    j["lr"] = state.lr;
    j["beta1"] = state.beta1;
    j["beta2"] = state.beta2;
    j["epsilon"] = state.epsilon;
    json moments = json::array();  // array keeps parameter order
    for (std::size_t k = 0; k < state.names.size(); ++k) {
        json entry;
        entry["name"] = state.names[k];
        entry["shape"] = state.m[k].shape();
        entry["m"] = std::vector<double>(state.m[k].data(), state.m[k].data() + state.m[k].size());
        entry["v"] = std::vector<double>(state.v[k].data(), state.v[k].data() + state.v[k].size());
        moments.push_back(std::move(entry));
    }
    j["moments"] = std::move(moments);
    return j.dump();
}

AdamState train_state_from_json(const std::string& json_text, std::size_t* epoch,
                                std::uint64_t* seed) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed training-state JSON");
    AdamState s;
    s.step = j.at("step").get<std::size_t>();
    s.lr = j.at("lr").get<double>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    if (epoch) *epoch = j.at("epoch").get<std::size_t>();
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    for (const auto& entry : j.at("moments")) {
        s.names.push_back(entry.at("name").get<std::string>());
        auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        Tensor m = shape.size() == 1 ? Tensor::vector(shape[0]) : Tensor::matrix(shape[0], shape[1]);
        Tensor v = m;
        auto mv = entry.at("m").get<std::vector<double>>();
        auto vv = entry.at("v").get<std::vector<double>>();
        std::copy(mv.begin(), mv.end(), m.data());
        std::copy(vv.begin(), vv.end(), v.data());
        s.m.push_back(std::move(m));
        s.v.push_back(std::move(v));
    }
    return s;
}

std::vector<double> score_articles(const encoders::HanModel& model,
                                   const std::vector<data::TokenizedArticle>& articles,
                                   std::size_t* skipped) {
    std::vector<double> scores(articles.size(), 0.5);
    std::size_t skip_count = 0;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        if (!encodable(model, articles[i])) {
            ++skip_count;
            continue;
        }
        auto enc = encoders::encode_article(model, articles[i].title_ids, articles[i].body_ids);
        Tensor probs = encoders::classify(model, enc.vec);
        scores[i] = probs[1];
    }
    if (skipped) *skipped = skip_count;
    return scores;
}

std::string report_to_json(const TrainReport& report) {
    json j;
    json epochs = json::array();
    for (const EpochStats& e : report.epochs) {
        epochs.push_back({{"train_loss", e.train_loss},
                          {"train_accuracy", e.train_accuracy},
                          {"val_precision", e.val_precision},
                          {"val_recall", e.val_recall},
                          {"val_roc_auc", e.val_roc_auc}});
    }
    j["epochs"] = std::move(epochs);
    j["best_epoch"] = report.best_epoch;
    j["wall_clock_seconds"] = report.wall_clock_seconds;
    j["clamp_events"] = report.clamp_events;
    j["skipped_incompatible"] = report.skipped_incompatible;
    j["aborted_nonfinite"] = report.aborted_nonfinite;
    return j.dump(2);
}

TrainReport train(encoders::HanModel& model, const std::vector<data::TokenizedArticle>& train_set,
                  const std::vector<data::TokenizedArticle>& val_set, const TrainConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    TrainReport report;
    if (config.batch_size == 0) throw DomainError("train: batch_size must be >= 1");

    std::vector<const data::TokenizedArticle*> usable;
    for (const auto& t : train_set) {
        if (encodable(model, t))
            usable.push_back(&t);
        else
            ++report.skipped_incompatible;
    }
    if (config.epochs == 0 || usable.empty()) {
        report.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return report;
    }

    std::array<double, 2> class_weights{1.0, 1.0};
    if (config.class_weights) {
        class_weights = *config.class_weights;
    } else {
        std::vector<int> labels;
        labels.reserve(usable.size());
        for (const auto* t : usable) labels.push_back(t->label);
        class_weights = auto_class_weights(labels).weights;
    }

    auto params = encoders::parameter_refs(model);
    if (!model.embedding.trainable) {
        std::erase_if(params, [](const auto& r) { return r.name == "embedding"; });
    }
    AdamState adam = adam_init(params, config.lr);

    std::vector<int> val_labels;
    for (const auto& t : val_set) val_labels.push_back(t.label);
    bool has_val = !val_set.empty();
    bool val_has_both_classes =
        has_val && std::any_of(val_labels.begin(), val_labels.end(), [](int l) { return l == 1; }) &&
        std::any_of(val_labels.begin(), val_labels.end(), [](int l) { return l == 0; });

    RngState base_rng(config.seed);
    std::vector<std::size_t> order(usable.size());
    std::iota(order.begin(), order.end(), 0);

    double best_val_auc = -1.0;
    std::size_t epochs_since_best = 0;
    bool stopped_at_target = false;
    ModelSnapshot best_params;
    ModelSnapshot last_good = snapshot(model);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        RngState shuffle_rng = base_rng.fork(2 * epoch);
        RngState dropout_rng = base_rng.fork(2 * epoch + 1);
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = shuffle_rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        bool nonfinite = false;
        for (std::size_t start = 0; start < order.size() && !nonfinite; start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            encoders::ModelGradients batch_grads = encoders::grads_like(model);
            for (std::size_t k = start; k < end; ++k) {
                const data::TokenizedArticle& art = *usable[order[k]];
                encoders::ArticleCache cache;
                layers::DenseCache dense_cache;
                auto enc = encoders::encode_article(model, art.title_ids, art.body_ids, &cache,
                                                    &dropout_rng);
                Tensor probs = encoders::classify(model, enc.vec, &dense_cache);
                auto ce = weighted_cross_entropy(probs, art.label, class_weights);
                if (ce.clamped) ++report.clamp_events;
                if (!std::isfinite(ce.loss)) {
                    nonfinite = true;
                    break;
                }
                epoch_loss += ce.loss;
                encoders::model_backward_into(model, cache, dense_cache, ce.d_logits, batch_grads);
            }
            if (nonfinite) break;
            scale_gradients(batch_grads, 1.0 / static_cast<double>(end - start));
            auto grad_refs = encoders::gradient_refs(batch_grads, model);
            if (!model.embedding.trainable) {
                std::erase_if(grad_refs, [](const auto& r) { return r.name == "embedding"; });
            }
            adam_update(adam, params, grad_refs);
            zero_pad_row(model);
        }

        if (nonfinite) {
            restore(model, last_good);
            report.aborted_nonfinite = true;
            break;
        }
        last_good = snapshot(model);

        EpochStats stats;
        stats.train_loss = epoch_loss / static_cast<double>(order.size());

        // evaluation-mode accuracy over the training set
        std::vector<double> train_scores;
        train_scores.reserve(usable.size());
        std::size_t correct = 0;
        for (const auto* t : usable) {
            auto enc = encoders::encode_article(model, t->title_ids, t->body_ids);
            Tensor probs = encoders::classify(model, enc.vec);
            train_scores.push_back(probs[1]);
            int predicted = probs[1] >= 0.5 ? 1 : 0;
            if (predicted == t->label) ++correct;
        }
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(usable.size());

        if (has_val) {
            std::vector<double> val_scores = score_articles(model, val_set);
            auto confusion = metrics::confusion_at(val_scores, val_labels, 0.5);
            double dp = static_cast<double>(confusion.tp + confusion.fp);
            double dr = static_cast<double>(confusion.tp + confusion.fn);
            stats.val_precision = dp > 0 ? confusion.tp / dp : 0.0;
            stats.val_recall = dr > 0 ? confusion.tp / dr : 0.0;
            if (val_has_both_classes) stats.val_roc_auc = metrics::roc_auc(val_scores, val_labels);
        }
        report.epochs.push_back(stats);

        if (config.target_train_accuracy > 0.0 &&
            stats.train_accuracy >= config.target_train_accuracy) {
            stopped_at_target = true;
            break;
        }

        if (has_val && val_has_both_classes && config.early_stop_patience > 0) {
            if (stats.val_roc_auc > best_val_auc) {
                best_val_auc = stats.val_roc_auc;
                report.best_epoch = report.epochs.size();
                best_params = snapshot(model);
                epochs_since_best = 0;
            } else {
                ++epochs_since_best;
                if (epochs_since_best >= config.early_stop_patience) break;
            }
        }
    }

    if (!stopped_at_target && report.best_epoch > 0 && !best_params.tensors.empty() &&
        report.best_epoch != report.epochs.size())
        restore(model, best_params);

    report.final_adam = std::move(adam);
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

const std::vector<std::string>& synthetic_trigger_tokens() {
    static const std::vector<std::string> triggers = {
        "zorblat", "quexal", "fribnix", "glarvon", "snerkip",
        "plimbor", "draxil",  "vexmor",  "krunzel", "blortan"};
    return triggers;
}

const std::vector<std::string>& synthetic_base_lexicon() {
    static const std::vector<std::string> lexicon = [] {
        static const char* starts[] = {"ba", "de", "fi", "go", "hu", "ja", "ke", "li", "mo", "nu",
                                       "pa", "re", "si", "to", "vu", "wa", "ze", "chi", "dro", "sta"};
        static const char* ends[] = {"lor", "mint", "rak", "send", "tive",
                                     "gon", "bell", "dash", "form", "nix"};
        std::vector<std::string> words;
        words.reserve(200);
        for (const char* a : starts)
            for (const char* b : ends) words.push_back(std::string(a) + b);
        return words;
    }();
    return lexicon;
}

SynthCorpus make_synthetic_corpus(std::size_t n, double trigger_rate, std::uint64_t seed,
                                  const SynthOptions& options) {
    if (n < 20) throw DomainError("make_synthetic_corpus: n must be >= 20, got " + std::to_string(n));
    if (trigger_rate < 0.0 || trigger_rate > 1.0)
        throw DomainError("make_synthetic_corpus: trigger_rate must be in [0, 1]");

    const auto& lexicon = synthetic_base_lexicon();
    const auto& triggers = synthetic_trigger_tokens();
    RngState rng(seed);

    // exact class counts, positions shuffled
    std::size_t n_unreliable =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * trigger_rate));
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n_unreliable; ++i) labels[i] = 1;
    for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.next_below(i)]);

    auto base_word = [&rng, &lexicon]() { return lexicon[rng.next_below(lexicon.size())]; };

    std::vector<data::Article> articles;
    articles.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> title_words;
        std::size_t title_len = 4 + rng.next_below(5);
        for (std::size_t k = 0; k < title_len; ++k) title_words.push_back(base_word());

        std::size_t n_sents = 3 + rng.next_below(4);
        std::vector<std::vector<std::string>> body_sents(n_sents);
        for (auto& sent : body_sents) {
            std::size_t len = 4 + rng.next_below(6);
            for (std::size_t k = 0; k < len; ++k) sent.push_back(base_word());
        }

        if (labels[i] == 1) {
            std::size_t n_triggers = 1 + rng.next_below(3);
            for (std::size_t k = 0; k < n_triggers; ++k) {
                const std::string& trig = triggers[rng.next_below(triggers.size())];
                bool into_title;
                switch (options.placement) {
                    case TriggerPlacement::title: into_title = true; break;
                    case TriggerPlacement::body: into_title = false; break;
                    default: into_title = rng.next_below(2) == 0; break;
                }
                if (into_title) {
                    std::size_t pos = rng.next_below(title_words.size() + 1);
                    title_words.insert(title_words.begin() + static_cast<long>(pos), trig);
                } else {
                    auto& sent = body_sents[rng.next_below(body_sents.size())];
                    std::size_t pos = rng.next_below(sent.size() + 1);
                    sent.insert(sent.begin() + static_cast<long>(pos), trig);
                }
            }
        }

        data::Article a;
        char uid[32];
        std::snprintf(uid, sizeof(uid), "synth-%06zu", i + 1);
        a.uid = uid;
        a.label = labels[i];
        for (std::size_t k = 0; k < title_words.size(); ++k) {
            if (k) a.title += " ";
            a.title += title_words[k];
        }
        for (std::size_t s = 0; s < body_sents.size(); ++s) {
            if (s) a.text += " ";
            for (std::size_t k = 0; k < body_sents[s].size(); ++k) {
                if (k) a.text += " ";
                a.text += body_sents[s][k];
            }
            a.text += ".";
        }
        articles.push_back(std::move(a));
    }

    SynthCorpus corpus;
    std::size_t n_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * options.test_fraction));
    std::size_t n_train = n - n_test;
    corpus.train.assign(articles.begin(), articles.begin() + static_cast<long>(n_train));
    corpus.test.assign(articles.begin() + static_cast<long>(n_train), articles.end());
    return corpus;
}

}  // namespace hanforge::training
