#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hanforge/data.hpp"
#include "hanforge/encoders.hpp"
#include "hanforge/tensor.hpp"

namespace hanforge::training {

using hanforge::RngState;
using hanforge::Tensor;

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

struct CrossEntropyResult {
    double loss = 0.0;
    Tensor d_logits;  // w_label * (probs - onehot(label))
    bool clamped = false;
};

// loss = -w_label * ln(max(probs[label], 1e-12)). The clamp keeps the
// objective finite under a saturated softmax; clamp events are counted,
// never silently ignored.
CrossEntropyResult weighted_cross_entropy(const Tensor& probs, int label,
                                          const std::array<double, 2>& class_weights);

// Balanced heuristic w_c = N / (2 N_c); weighted counts equalize exactly.
struct AutoWeights {
    std::array<double, 2> weights;
    // exact rational view: w_c = num / den
    std::array<long long, 2> num;
    std::array<long long, 2> den;
};
AutoWeights auto_class_weights(const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    std::size_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<std::string> names;
    std::vector<Tensor> m, v;  // moment accumulators, aligned with names
};

AdamState adam_init(const std::vector<encoders::NamedTensorRef>& params, double lr);

// One bias-corrected update over aligned parameter/gradient lists.
void adam_update(AdamState& state, const std::vector<encoders::NamedTensorRef>& params,
                 const std::vector<encoders::NamedTensorRef>& grads);

std::string train_state_to_json(const AdamState& state, std::size_t epoch, std::uint64_t seed);
AdamState train_state_from_json(const std::string& json_text, std::size_t* epoch = nullptr,
                                std::uint64_t* seed = nullptr);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t epochs = 10;
    double lr = 1e-3;
    // nullopt = derive balanced weights from the training labels
    std::optional<std::array<double, 2>> class_weights;
    std::uint64_t seed = 42;
    std::size_t early_stop_patience = 3;  // epochs without val ROC-AUC improvement; 0 disables
    double target_train_accuracy = 0.0;   // stop once reached; 0 disables
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_precision = 0.0;
    double val_recall = 0.0;
    double val_roc_auc = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // 1-based epoch with the best validation ROC-AUC; 0 = none
    double wall_clock_seconds = 0.0;
    std::size_t clamp_events = 0;
    std::size_t skipped_incompatible = 0;  // articles the variant cannot encode
    bool aborted_nonfinite = false;
    AdamState final_adam;  // optimizer moments for the checkpoint sidecar
};

std::string report_to_json(const TrainReport& report);

// Mini-batch training with deterministic seeded shuffling, mean-over-batch
// gradients and Adam updates. The model is updated in place; when validation
// articles are supplied and early stopping fires, the best-epoch parameters
// are restored.
TrainReport train(encoders::HanModel& model, const std::vector<data::TokenizedArticle>& train_set,
                  const std::vector<data::TokenizedArticle>& val_set, const TrainConfig& config);

// Evaluation-mode p(unreliable) per article. Articles the variant cannot
// encode score 0.5 (chance) and are reported through `skipped` when given.
std::vector<double> score_articles(const encoders::HanModel& model,
                                   const std::vector<data::TokenizedArticle>& articles,
                                   std::size_t* skipped = nullptr);

// ---------------------------------------------------------------------------
// Synthetic trigger corpus
// ---------------------------------------------------------------------------

enum class TriggerPlacement { mixed, title, body };

struct SynthOptions {
    double test_fraction = 1.0 / 3.0;
    TriggerPlacement placement = TriggerPlacement::mixed;
};

struct SynthCorpus {
    std::vector<data::Article> train;
    std::vector<data::Article> test;
};

// Articles drawn from a 200-word base lexicon; unreliable articles plant 1-3
// tokens from a 10-token trigger set, reliable articles contain none.
// trigger_rate is the unreliable fraction (default mirrors the 70/30 split
// of the reference corpus). Deterministic given seed.
SynthCorpus make_synthetic_corpus(std::size_t n, double trigger_rate, std::uint64_t seed,
                                  const SynthOptions& options = {});

const std::vector<std::string>& synthetic_trigger_tokens();
const std::vector<std::string>& synthetic_base_lexicon();

}  // namespace hanforge::training
