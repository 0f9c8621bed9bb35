#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "hanforge/data.hpp"
#include "hanforge/metrics.hpp"
#include "hanforge/tensor.hpp"

namespace hanforge::baselines {

using hanforge::Tensor;

// Sparse document vector: sorted (feature index, weight) pairs.
struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;
    bool all_oov = false;  // set when every token fell outside the vocabulary

    double norm() const;
};

struct TfidfModel {
    data::Vocabulary vocabulary;
    std::vector<std::size_t> doc_freq;  // per token id (presence counts)
    std::size_t n_docs = 0;
};

// Document frequencies over per-document token lists (presence, not
// multiplicity). Vocabulary spans all tokens seen, optionally capped by
// frequency like build_vocab.
TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs, std::size_t max_vocab = 0);

// weight(t) = tf(t) * (ln((1 + n_docs)/(1 + df(t))) + 1), then L2-normalized.
SparseVector tfidf_vector(const TfidfModel& model, const std::vector<std::string>& tokens);

double idf(const TfidfModel& model, std::size_t token_id);

enum class Scenario { title, body, title_plus_body, title_concat_body };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);
const std::vector<Scenario>& all_scenarios();

// Tokenized views of one article used by the scenario builders.
struct ArticleTokens {
    std::vector<std::string> title;
    std::vector<std::string> body;
    int label = 0;
};
ArticleTokens article_tokens(const data::Article& article);

// Feature layout per scenario: title/body/title_plus_body use one tfidf
// vector (dimension V); title_concat_body concatenates the title and body
// vectors (dimension 2V).
SparseVector scenario_features(const ArticleTokens& tokens, Scenario scenario,
                               const TfidfModel& model);
std::size_t scenario_dimension(Scenario scenario, const TfidfModel& model);

// L2-regularized logistic regression, full-batch gradient descent on the
// class-weighted log loss. Weights start at zero, so the fit is deterministic.
struct LinearConfig {
    double lr = 0.5;
    std::size_t epochs = 200;
    double l2 = 1e-4;
};

struct LinearClassifier {
    Tensor weights;
    double bias = 0.0;
    LinearConfig trained_with;

    double score(const SparseVector& features) const;  // p(unreliable)
};

LinearClassifier fit_linear(const std::vector<SparseVector>& features,
                            const std::vector<int>& labels,
                            const std::array<double, 2>& class_weights, std::size_t dimension,
                            const LinearConfig& config = {});

// Loss/gradient of the objective at given weights (exposed for gradient checks).
double linear_loss(const LinearClassifier& clf, const std::vector<SparseVector>& features,
                   const std::vector<int>& labels, const std::array<double, 2>& class_weights,
                   Tensor* grad_weights = nullptr, double* grad_bias = nullptr);

struct ScenarioResult {
    Scenario scenario;
    metrics::EvalResult eval;
    std::vector<double> test_scores;
};

// Fit TF-IDF on the training split (title + body text), train one linear
// classifier per scenario, evaluate on the test split. Rows follow the fixed
// scenario order: title, body, title_plus_body, title_concat_body.
std::vector<ScenarioResult> evaluate_scenarios(const std::vector<data::Article>& train,
                                               const std::vector<data::Article>& test,
                                               const LinearConfig& config = {});

std::string scenario_table_csv(const std::vector<ScenarioResult>& results);
std::string scenario_table_json(const std::vector<ScenarioResult>& results);

}  // namespace hanforge::baselines
