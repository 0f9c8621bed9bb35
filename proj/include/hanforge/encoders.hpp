#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hanforge/layers.hpp"
#include "hanforge/tensor.hpp"

namespace hanforge::encoders {

using hanforge::RngState;
using hanforge::Tensor;

enum class Variant { v1, v2 };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct HyperParams {
    std::size_t max_words_per_sentence = 64;
    std::size_t max_sentences_per_doc = 64;
    std::size_t embedding_dim = 100;
    std::size_t hidden_size = 50;  // per direction; annotations are 2H wide
    double dropout_rate = 0.5;
};

// Full parameter set of one encoder variant. v1 models carry no article-level
// parameters; v2 models carry all of them. The article-level BiGRU is shared
// between the title and body passes unless separate_article_grus is set; the
// joint_article_sequence flag switches to running [s_title, d_body] as one
// length-2 sequence instead of two independent length-1 passes.
struct HanModel {
    Variant variant = Variant::v1;
    HyperParams hyper;

    layers::EmbeddingMatrix embedding;
    layers::GruParams word_fwd, word_bwd;
    layers::AttentionParams word_attn;
    layers::GruParams sent_fwd, sent_bwd;
    layers::AttentionParams sent_attn;

    layers::GruParams art_fwd, art_bwd;            // v2 only
    layers::GruParams art_fwd_body, art_bwd_body;  // v2 + separate_article_grus only
    layers::AttentionParams art_attn;              // v2 only
    bool separate_article_grus = false;
    bool joint_article_sequence = false;

    layers::DenseParams classifier;
};

// Per-article record of attention weights at every level, for explanation
// and visualization. Token strings are attached by the caller, which owns
// the vocabulary.
struct AttentionTrace {
    std::vector<Tensor> word_weights;  // one vector per sentence; empty for padded-out sentences
    Tensor sentence_weights;
    bool has_article_weights = false;
    double title_weight = 0.0;
    double body_weight = 0.0;
    std::vector<std::vector<std::string>> sentence_texts;
    std::vector<std::string> title_tokens;  // v2: the title's own token strings
    Tensor title_word_weights;              // v2: word weights of the separately encoded title
};

// Deterministic model construction: every weight drawn from `rng`, biases zero.
HanModel init_model(Variant variant, const HyperParams& hyper, std::size_t vocab_size,
                    RngState& rng, bool separate_article_grus = false,
                    bool joint_article_sequence = false);

// ---------------------------------------------------------------------------
// Forward passes. A non-null `dropout_rng` selects training mode: dropout is
// applied to the pooled output of every attention level and the masks are
// recorded in the cache. Evaluation mode (null rng) is dropout-free and
// deterministic.
// ---------------------------------------------------------------------------

struct SentenceCache {
    std::vector<std::size_t> real_positions;  // indices of non-PAD tokens in the input
    std::vector<std::size_t> real_ids;
    layers::BigruCache bigru;
    layers::AttentionCache attn;
    Tensor dropout_mask;  // empty in evaluation mode
    bool valid = false;
};

struct DocumentCache {
    std::vector<SentenceCache> sentences;  // aligned with input; skipped sentences stay invalid
    std::vector<std::size_t> active;       // indices of sentences that entered the BiGRU
    layers::BigruCache bigru;
    layers::AttentionCache attn;
    Tensor dropout_mask;
    bool valid = false;
};

struct ArticleCache {
    Variant variant = Variant::v1;
    DocumentCache doc;        // v1: combined doc; v2: body doc
    SentenceCache title;      // v2 only
    layers::BigruCache title_art, body_art;  // v2 literal mode (body_art unused in joint mode)
    layers::AttentionCache art_attn;
    Tensor dropout_mask;  // v2: over the article vector
    bool valid = false;
};

struct SentenceEncoding {
    Tensor vec;           // 2H
    Tensor word_weights;  // length of the input; exactly 0 at PAD positions
};

struct DocumentEncoding {
    Tensor vec;  // 2H
    AttentionTrace trace;
};

// Word BiGRU + word attention over the non-PAD tokens of one sentence.
// PAD positions are excluded from the recurrence and carry weight exactly 0.
SentenceEncoding encode_sentence(const HanModel& model, const std::vector<std::size_t>& token_ids,
                                 SentenceCache* cache = nullptr, RngState* dropout_rng = nullptr);

// Sentence encodings -> sentence BiGRU -> sentence attention. Sentences that
// are empty or all-PAD are treated as padding: excluded from the recurrence,
// sentence weight exactly 0.
DocumentEncoding encode_document(const HanModel& model,
                                 const std::vector<std::vector<std::size_t>>& sentences,
                                 DocumentCache* cache = nullptr, RngState* dropout_rng = nullptr);

// Title prepended as sentence 0 of the body, then encoded as one document.
// Under truncation the title always survives; the body keeps the first
// max_sentences - 1 sentences.
DocumentEncoding encode_article_v1(const HanModel& model, const std::vector<std::size_t>& title,
                                   const std::vector<std::vector<std::size_t>>& body,
                                   ArticleCache* cache = nullptr, RngState* dropout_rng = nullptr);

// Title through the sentence encoder, body through the document encoder, both
// through the article BiGRU, then two-way article attention.
DocumentEncoding encode_article_v2(const HanModel& model, const std::vector<std::size_t>& title,
                                   const std::vector<std::vector<std::size_t>>& body,
                                   ArticleCache* cache = nullptr, RngState* dropout_rng = nullptr);

// Dispatch on model.variant.
DocumentEncoding encode_article(const HanModel& model, const std::vector<std::size_t>& title,
                                const std::vector<std::vector<std::size_t>>& body,
                                ArticleCache* cache = nullptr, RngState* dropout_rng = nullptr);

// [p_reliable, p_unreliable]
Tensor classify(const HanModel& model, const Tensor& v_article,
                layers::DenseCache* cache = nullptr);

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

struct ModelGradients {
    Tensor embedding;  // V x d
    layers::GruGrads word_fwd, word_bwd, sent_fwd, sent_bwd;
    layers::AttentionGrads word_attn, sent_attn;
    layers::GruGrads art_fwd, art_bwd, art_fwd_body, art_bwd_body;
    layers::AttentionGrads art_attn;
    layers::DenseGrads classifier;
};

ModelGradients grads_like(const HanModel& model);
void scale_gradients(ModelGradients& grads, double s);
void accumulate_gradients(ModelGradients& into, const ModelGradients& from, double scale);

// Chain-rule composition through the whole hierarchy, starting from the
// gradient w.r.t. the classifier's pre-softmax logits.
void model_backward_into(const HanModel& model, const ArticleCache& cache,
                         const layers::DenseCache& classifier_cache, const Tensor& d_logits,
                         ModelGradients& grads);
ModelGradients model_backward(const HanModel& model, const ArticleCache& cache,
                              const layers::DenseCache& classifier_cache, const Tensor& d_logits);

// ---------------------------------------------------------------------------
// Parameter enumeration: a stable name -> tensor view over everything the
// variant owns, in a fixed order shared by the optimizer and serialization.
// ---------------------------------------------------------------------------

struct NamedTensorRef {
    std::string name;
    Tensor* tensor;
};
struct NamedTensorCRef {
    std::string name;
    const Tensor* tensor;
};

std::vector<NamedTensorRef> parameter_refs(HanModel& model);
std::vector<NamedTensorCRef> parameter_refs(const HanModel& model);
std::vector<NamedTensorRef> gradient_refs(ModelGradients& grads, const HanModel& model);

}  // namespace hanforge::encoders
