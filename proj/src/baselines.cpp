#include "hanforge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hanforge/training.hpp"

namespace hanforge::baselines {

namespace {

std::vector<std::string> body_tokens(const data::Article& article) {
    std::vector<std::string> tokens;
    for (const std::string& sent : data::split_sentences(article.body()))
        for (std::string& tok : data::tokenize_words(sent)) tokens.push_back(std::move(tok));
    return tokens;
}

}  // namespace

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& [idx, w] : entries) s += w * w;
    return std::sqrt(s);
}

TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs, std::size_t max_vocab) {
    if (docs.empty()) throw DomainError("fit_tfidf: empty corpus");
    std::map<std::string, std::size_t> presence;
    for (const auto& doc : docs) {
        std::set<std::string> seen(doc.begin(), doc.end());
        for (const std::string& tok : seen) ++presence[tok];
    }

    // rank by document frequency with lexicographic tie-break when capped
    std::vector<std::pair<std::size_t, std::string>> ranked;
    ranked.reserve(presence.size());
    for (auto& [tok, df] : presence) ranked.emplace_back(df, tok);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (max_vocab > 0 && ranked.size() > max_vocab) ranked.resize(max_vocab);

    TfidfModel model;
    model.n_docs = docs.size();
    model.vocabulary.id_to_token = {data::kPadToken, data::kUnkToken};
    model.doc_freq = {0, 0};
    for (auto& [df, tok] : ranked) {
        model.vocabulary.id_to_token.push_back(tok);
        model.doc_freq.push_back(df);
    }
    for (std::size_t i = 0; i < model.vocabulary.id_to_token.size(); ++i)
        model.vocabulary.token_to_id[model.vocabulary.id_to_token[i]] = i;
    return model;
}

double idf(const TfidfModel& model, std::size_t token_id) {
    double df = static_cast<double>(model.doc_freq.at(token_id));
    return std::log((1.0 + static_cast<double>(model.n_docs)) / (1.0 + df)) + 1.0;
}

SparseVector tfidf_vector(const TfidfModel& model, const std::vector<std::string>& tokens) {
    if (model.n_docs == 0) throw StateError("tfidf_vector: model not fitted");
    std::map<std::size_t, double> counts;
    std::size_t in_vocab = 0;
    for (const std::string& tok : tokens) {
        auto it = model.vocabulary.token_to_id.find(tok);
        if (it == model.vocabulary.token_to_id.end()) continue;  // OOV tokens ignored
        ++counts[it->second];
        ++in_vocab;
    }
    SparseVector v;
    if (in_vocab == 0) {
        v.all_oov = true;
        return v;
    }
    for (auto& [id, tf] : counts) v.entries.emplace_back(id, tf * idf(model, id));
    double n = v.norm();
    if (n > 0)
        for (auto& [id, w] : v.entries) w /= n;
    return v;
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::title: return "title";
        case Scenario::body: return "body";
        case Scenario::title_plus_body: return "title_plus_body";
        case Scenario::title_concat_body: return "title_concat_body";
    }
    return "?";
}

Scenario scenario_from_name(const std::string& name) {
    for (Scenario s : all_scenarios())
        if (scenario_name(s) == name) return s;
    throw ConfigError("unknown scenario '" + name +
                      "', expected title|body|title_plus_body|title_concat_body");
}

const std::vector<Scenario>& all_scenarios() {
    static const std::vector<Scenario> order = {Scenario::title, Scenario::body,
                                                Scenario::title_plus_body,
                                                Scenario::title_concat_body};
    return order;
}

ArticleTokens article_tokens(const data::Article& article) {
    ArticleTokens t;
    t.title = data::tokenize_words(article.title);
    t.body = body_tokens(article);
    t.label = article.label;
    return t;
}

std::size_t scenario_dimension(Scenario scenario, const TfidfModel& model) {
    std::size_t v = model.vocabulary.size();
    return scenario == Scenario::title_concat_body ? 2 * v : v;
}

SparseVector scenario_features(const ArticleTokens& tokens, Scenario scenario,
                               const TfidfModel& model) {
    switch (scenario) {
        case Scenario::title:
            return tfidf_vector(model, tokens.title);
        case Scenario::body:
            return tfidf_vector(model, tokens.body);
        case Scenario::title_plus_body: {
            std::vector<std::string> combined = tokens.title;
            combined.insert(combined.end(), tokens.body.begin(), tokens.body.end());
            return tfidf_vector(model, combined);
        }
        case Scenario::title_concat_body: {
            SparseVector title_vec = tfidf_vector(model, tokens.title);
            SparseVector body_vec = tfidf_vector(model, tokens.body);
            SparseVector out;
            out.all_oov = title_vec.all_oov && body_vec.all_oov;
            out.entries = std::move(title_vec.entries);
            std::size_t v = model.vocabulary.size();
            for (auto& [id, w] : body_vec.entries) out.entries.emplace_back(id + v, w);
            return out;
        }
    }
    throw ConfigError("scenario_features: unknown scenario");
}

double LinearClassifier::score(const SparseVector& features) const {
    double z = bias;
    for (const auto& [idx, w] : features.entries) z += weights[idx] * w;
    return 1.0 / (1.0 + std::exp(-z));
}

double linear_loss(const LinearClassifier& clf, const std::vector<SparseVector>& features,
                   const std::vector<int>& labels, const std::array<double, 2>& class_weights,
                   Tensor* grad_weights, double* grad_bias) {
    std::size_t n = features.size();
    double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    if (grad_weights) grad_weights->fill(0.0);
    if (grad_bias) *grad_bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = clf.score(features[i]);
        double y = labels[i] == 1 ? 1.0 : 0.0;
        double cw = class_weights[static_cast<std::size_t>(labels[i])];
        double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
        loss += -cw * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc)) * inv_n;
        if (grad_weights || grad_bias) {
            double g = cw * (p - y) * inv_n;
            if (grad_bias) *grad_bias += g;
            if (grad_weights)
                for (const auto& [idx, w] : features[i].entries) (*grad_weights)[idx] += g * w;
        }
    }
    double l2 = clf.trained_with.l2;
    for (std::size_t k = 0; k < clf.weights.size(); ++k) {
        loss += 0.5 * l2 * clf.weights[k] * clf.weights[k];
        if (grad_weights) (*grad_weights)[k] += l2 * clf.weights[k];
    }
    return loss;
}

LinearClassifier fit_linear(const std::vector<SparseVector>& features,
                            const std::vector<int>& labels,
                            const std::array<double, 2>& class_weights, std::size_t dimension,
                            const LinearConfig& config) {
    if (features.empty()) throw DomainError("fit_linear: empty training set");
    if (features.size() != labels.size())
        throw DimensionError("fit_linear: features/labels length mismatch");
    bool pos = false, neg = false;
    for (int l : labels) (l == 1 ? pos : neg) = true;
    if (!pos || !neg) throw DomainError("fit_linear: both classes must be present");

    LinearClassifier clf;
    clf.weights = Tensor::vector(dimension);
    clf.trained_with = config;
    Tensor grad = Tensor::vector(dimension);
    double grad_bias = 0.0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        linear_loss(clf, features, labels, class_weights, &grad, &grad_bias);
        clf.weights.add_scaled(grad, -config.lr);
        clf.bias -= config.lr * grad_bias;
    }
    return clf;
}

std::vector<ScenarioResult> evaluate_scenarios(const std::vector<data::Article>& train,
                                               const std::vector<data::Article>& test,
                                               const LinearConfig& config) {
    if (train.empty() || test.empty())
        throw DomainError("evaluate_scenarios: train and test splits must be nonempty");

    std::vector<ArticleTokens> train_tokens, test_tokens;
    train_tokens.reserve(train.size());
    test_tokens.reserve(test.size());
    for (const auto& a : train) train_tokens.push_back(article_tokens(a));
    for (const auto& a : test) test_tokens.push_back(article_tokens(a));

    // vocabulary from title + body of the training split
    std::vector<std::vector<std::string>> docs;
    docs.reserve(train.size());
    for (const auto& t : train_tokens) {
        std::vector<std::string> combined = t.title;
        combined.insert(combined.end(), t.body.begin(), t.body.end());
        docs.push_back(std::move(combined));
    }
    TfidfModel tfidf = fit_tfidf(docs);

    std::vector<int> train_labels, test_labels;
    for (const auto& t : train_tokens) train_labels.push_back(t.label);
    for (const auto& t : test_tokens) test_labels.push_back(t.label);
    auto class_weights = training::auto_class_weights(train_labels).weights;

    std::vector<ScenarioResult> results;
    for (Scenario scenario : all_scenarios()) {
        std::vector<SparseVector> train_feats, test_feats;
        train_feats.reserve(train_tokens.size());
        test_feats.reserve(test_tokens.size());
        for (const auto& t : train_tokens) train_feats.push_back(scenario_features(t, scenario, tfidf));
        for (const auto& t : test_tokens) test_feats.push_back(scenario_features(t, scenario, tfidf));

        LinearClassifier clf = fit_linear(train_feats, train_labels, class_weights,
                                          scenario_dimension(scenario, tfidf), config);
        ScenarioResult r;
        r.scenario = scenario;
        r.test_scores.reserve(test_feats.size());
        for (const auto& f : test_feats) r.test_scores.push_back(clf.score(f));
        r.eval = metrics::evaluate(r.test_scores, test_labels);
        results.push_back(std::move(r));
    }
    return results;
}

std::string scenario_table_csv(const std::vector<ScenarioResult>& results) {
    std::ostringstream out;
    out << "scenario,precision,recall,roc_auc\n";
    out.precision(6);
    for (const auto& r : results)
        out << scenario_name(r.scenario) << "," << r.eval.precision << "," << r.eval.recall << ","
            << r.eval.roc_auc << "\n";
    return out.str();
}

std::string scenario_table_json(const std::vector<ScenarioResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        arr.push_back({{"scenario", scenario_name(r.scenario)},
                       {"precision", r.eval.precision},
                       {"recall", r.eval.recall},
                       {"roc_auc", r.eval.roc_auc}});
    }
    return arr.dump(2);
}

}  // namespace hanforge::baselines
