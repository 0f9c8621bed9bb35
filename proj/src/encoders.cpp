#include "hanforge/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hanforge::encoders {

namespace {

constexpr std::size_t kPadId = 0;

// Pooled attention outputs are dropped out in training mode; the mask is
// recorded so the backward pass can replay it.
Tensor apply_dropout(Tensor& vec, const HyperParams& hyper, RngState* rng) {
    if (!rng || hyper.dropout_rate == 0.0) return Tensor();
    Tensor mask = dropout_mask(vec.size(), hyper.dropout_rate, *rng);
    for (std::size_t i = 0; i < vec.size(); ++i) vec[i] *= mask[i];
    return mask;
}

void backprop_dropout(Tensor& d, const Tensor& mask) {
    if (mask.empty()) return;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask[i];
}

bool all_pad(const std::vector<std::size_t>& ids) {
    for (std::size_t id : ids)
        if (id != kPadId) return false;
    return true;
}

Tensor row_of(const Tensor& m, std::size_t r) {
    Tensor v = Tensor::vector(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) v[c] = m.at(r, c);
    return v;
}

// Backward through one sentence encoding; d_s is the gradient w.r.t. the
// (post-dropout) pooled sentence vector.
void sentence_backward(const HanModel& model, const SentenceCache& cache, Tensor d_s,
                       ModelGradients& grads) {
    if (!cache.valid) throw StateError("sentence_backward: missing forward cache");
    backprop_dropout(d_s, cache.dropout_mask);
    Tensor d_annotations;
    layers::attention_pool_backward_into(model.word_attn, cache.attn, d_s, Tensor(),
                                         grads.word_attn, d_annotations);
    Tensor d_xs;
    layers::bigru_backward_into(model.word_fwd, model.word_bwd, cache.bigru, d_annotations,
                                grads.word_fwd, grads.word_bwd, d_xs);
    if (model.embedding.trainable)
        layers::embed_lookup_backward_into(cache.real_ids, d_xs, grads.embedding);
}

void document_backward(const HanModel& model, const DocumentCache& cache, Tensor d_doc,
                       ModelGradients& grads) {
    if (!cache.valid) throw StateError("document_backward: missing forward cache");
    backprop_dropout(d_doc, cache.dropout_mask);
    Tensor d_sent_annotations;
    layers::attention_pool_backward_into(model.sent_attn, cache.attn, d_doc, Tensor(),
                                         grads.sent_attn, d_sent_annotations);
    Tensor d_svecs;
    layers::bigru_backward_into(model.sent_fwd, model.sent_bwd, cache.bigru, d_sent_annotations,
                                grads.sent_fwd, grads.sent_bwd, d_svecs);
    for (std::size_t k = 0; k < cache.active.size(); ++k)
        sentence_backward(model, cache.sentences[cache.active[k]], row_of(d_svecs, k), grads);
}

}  // namespace

std::string variant_name(Variant v) {
    return v == Variant::v1 ? "v1" : "v2";
}

Variant variant_from_name(const std::string& name) {
    if (name == "v1") return Variant::v1;
    if (name == "v2") return Variant::v2;
    throw ConfigError("unknown variant '" + name + "', expected v1 or v2");
}

HanModel init_model(Variant variant, const HyperParams& hyper, std::size_t vocab_size,
                    RngState& rng, bool separate_article_grus, bool joint_article_sequence) {
    if (hyper.max_words_per_sentence == 0 || hyper.max_sentences_per_doc == 0 ||
        hyper.embedding_dim == 0 || hyper.hidden_size == 0)
        throw ConfigError("init_model: every hyperparameter count must be >= 1");
    if (hyper.dropout_rate < 0.0 || hyper.dropout_rate >= 1.0)
        throw ConfigError("init_model: dropout_rate must be in [0, 1), got " +
                          std::to_string(hyper.dropout_rate));
    if (vocab_size < 2)
        throw ConfigError("init_model: vocabulary must contain at least PAD and UNK");
    HanModel m;
    m.variant = variant;
    m.hyper = hyper;
    m.separate_article_grus = separate_article_grus;
    m.joint_article_sequence = joint_article_sequence;

    std::size_t d = hyper.embedding_dim;
    std::size_t H = hyper.hidden_size;
    std::size_t D = 2 * H;  // annotation width; attention size defaults to D

    m.embedding.weights = Tensor::matrix(vocab_size, d);
    for (std::size_t r = 1; r < vocab_size; ++r)
        for (std::size_t c = 0; c < d; ++c) m.embedding.weights.at(r, c) = rng.next_uniform(-0.05, 0.05);

    m.word_fwd = layers::gru_init(H, d, rng);
    m.word_bwd = layers::gru_init(H, d, rng);
    m.word_attn = layers::attention_init(D, D, rng);
    m.sent_fwd = layers::gru_init(H, D, rng);
    m.sent_bwd = layers::gru_init(H, D, rng);
    m.sent_attn = layers::attention_init(D, D, rng);
    if (variant == Variant::v2) {
        m.art_fwd = layers::gru_init(H, D, rng);
        m.art_bwd = layers::gru_init(H, D, rng);
        if (separate_article_grus) {
            m.art_fwd_body = layers::gru_init(H, D, rng);
            m.art_bwd_body = layers::gru_init(H, D, rng);
        }
        m.art_attn = layers::attention_init(D, D, rng);
    }
    m.classifier = layers::dense_init(2, D, rng);
    return m;
}

SentenceEncoding encode_sentence(const HanModel& model, const std::vector<std::size_t>& token_ids,
                                 SentenceCache* cache, RngState* dropout_rng) {
    std::size_t limit = std::min(token_ids.size(), model.hyper.max_words_per_sentence);
    std::vector<std::size_t> real_positions, real_ids;
    for (std::size_t t = 0; t < limit; ++t) {
        if (token_ids[t] != kPadId) {
            real_positions.push_back(t);
            real_ids.push_back(token_ids[t]);
        }
    }
    if (real_ids.empty())
        throw DomainError("encode_sentence: sentence has no non-PAD tokens");

    layers::BigruCache bigru_cache;
    layers::AttentionCache attn_cache;
    Tensor xs = layers::embed_lookup(model.embedding, real_ids);
    Tensor annotations = layers::bigru_forward(model.word_fwd, model.word_bwd, xs,
                                               cache ? &bigru_cache : nullptr);
    auto pooled = layers::attention_pool(model.word_attn, annotations,
                                         cache ? &attn_cache : nullptr);

    Tensor mask = apply_dropout(pooled.pooled, model.hyper, dropout_rng);

    Tensor full_weights = Tensor::vector(token_ids.size());
    for (std::size_t k = 0; k < real_positions.size(); ++k)
        full_weights[real_positions[k]] = pooled.weights[k];

    if (cache) {
        cache->real_positions = std::move(real_positions);
        cache->real_ids = std::move(real_ids);
        cache->bigru = std::move(bigru_cache);
        cache->attn = std::move(attn_cache);
        cache->dropout_mask = std::move(mask);
        cache->valid = true;
    }
    return {std::move(pooled.pooled), std::move(full_weights)};
}

DocumentEncoding encode_document(const HanModel& model,
                                 const std::vector<std::vector<std::size_t>>& sentences,
                                 DocumentCache* cache, RngState* dropout_rng) {
    if (sentences.empty()) throw DomainError("encode_document: empty document");
    std::size_t limit = std::min(sentences.size(), model.hyper.max_sentences_per_doc);

    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < limit; ++j)
        if (!sentences[j].empty() && !all_pad(sentences[j])) active.push_back(j);
    if (active.empty())
        throw DomainError("encode_document: every sentence is empty or all-PAD");

    AttentionTrace trace;
    trace.word_weights.assign(limit, Tensor());

    std::size_t D = 2 * model.hyper.hidden_size;
    Tensor svecs = Tensor::matrix(active.size(), D);
    std::vector<SentenceCache> sent_caches(cache ? limit : 0);
    for (std::size_t k = 0; k < active.size(); ++k) {
        std::size_t j = active[k];
        auto enc = encode_sentence(model, sentences[j], cache ? &sent_caches[j] : nullptr,
                                   dropout_rng);
        for (std::size_t c = 0; c < D; ++c) svecs.at(k, c) = enc.vec[c];
        trace.word_weights[j] = std::move(enc.word_weights);
    }

    layers::BigruCache bigru_cache;
    layers::AttentionCache attn_cache;
    Tensor annotations = layers::bigru_forward(model.sent_fwd, model.sent_bwd, svecs,
                                               cache ? &bigru_cache : nullptr);
    auto pooled = layers::attention_pool(model.sent_attn, annotations,
                                         cache ? &attn_cache : nullptr);
    Tensor mask = apply_dropout(pooled.pooled, model.hyper, dropout_rng);

    trace.sentence_weights = Tensor::vector(limit);
    for (std::size_t k = 0; k < active.size(); ++k)
        trace.sentence_weights[active[k]] = pooled.weights[k];

    if (cache) {
        cache->sentences = std::move(sent_caches);
        cache->active = std::move(active);
        cache->bigru = std::move(bigru_cache);
        cache->attn = std::move(attn_cache);
        cache->dropout_mask = std::move(mask);
        cache->valid = true;
    }
    return {std::move(pooled.pooled), std::move(trace)};
}

DocumentEncoding encode_article_v1(const HanModel& model, const std::vector<std::size_t>& title,
                                   const std::vector<std::vector<std::size_t>>& body,
                                   ArticleCache* cache, RngState* dropout_rng) {
    if (model.variant != Variant::v1)
        throw ConfigError("encode_article_v1: model variant is " + variant_name(model.variant));
    bool has_title = !title.empty() && !all_pad(title);
    std::vector<std::vector<std::size_t>> combined;
    combined.reserve(body.size() + 1);
    if (has_title) combined.push_back(title);
    // title always survives truncation; the body keeps what space remains
    std::size_t body_cap = model.hyper.max_sentences_per_doc - (has_title ? 1 : 0);
    for (std::size_t j = 0; j < body.size() && j < body_cap; ++j) combined.push_back(body[j]);

    if (cache) cache->variant = Variant::v1;
    auto enc = encode_document(model, combined, cache ? &cache->doc : nullptr, dropout_rng);
    if (cache) cache->valid = true;
    return enc;
}

DocumentEncoding encode_article_v2(const HanModel& model, const std::vector<std::size_t>& title,
                                   const std::vector<std::vector<std::size_t>>& body,
                                   ArticleCache* cache, RngState* dropout_rng) {
    if (model.variant != Variant::v2)
        throw ConfigError("encode_article_v2: model variant is " + variant_name(model.variant));
    if (title.empty() || all_pad(title))
        throw DomainError("encode_article_v2: title is empty");
    if (body.empty())
        throw DomainError("encode_article_v2: body is empty");

    if (cache) cache->variant = Variant::v2;
    auto title_enc = encode_sentence(model, title, cache ? &cache->title : nullptr, dropout_rng);
    auto body_enc = encode_document(model, body, cache ? &cache->doc : nullptr, dropout_rng);

    std::size_t D = 2 * model.hyper.hidden_size;
    const layers::GruParams& body_fwd = model.separate_article_grus ? model.art_fwd_body : model.art_fwd;
    const layers::GruParams& body_bwd = model.separate_article_grus ? model.art_bwd_body : model.art_bwd;

    Tensor h_title, h_body;
    if (model.joint_article_sequence) {
        Tensor seq = Tensor::matrix(2, D);
        for (std::size_t c = 0; c < D; ++c) {
            seq.at(0, c) = title_enc.vec[c];
            seq.at(1, c) = body_enc.vec[c];
        }
        Tensor ann = layers::bigru_forward(model.art_fwd, model.art_bwd, seq,
                                           cache ? &cache->title_art : nullptr);
        h_title = row_of(ann, 0);
        h_body = row_of(ann, 1);
    } else {
        // the literal reading: each vector runs through the BiGRU alone,
        // from zero initial states
        Tensor seq_t = Tensor::matrix(1, D);
        Tensor seq_b = Tensor::matrix(1, D);
        for (std::size_t c = 0; c < D; ++c) {
            seq_t.at(0, c) = title_enc.vec[c];
            seq_b.at(0, c) = body_enc.vec[c];
        }
        h_title = row_of(layers::bigru_forward(model.art_fwd, model.art_bwd, seq_t,
                                               cache ? &cache->title_art : nullptr),
                         0);
        h_body = row_of(layers::bigru_forward(body_fwd, body_bwd, seq_b,
                                              cache ? &cache->body_art : nullptr),
                        0);
    }

    Tensor pair = Tensor::matrix(2, h_title.size());
    for (std::size_t c = 0; c < h_title.size(); ++c) {
        pair.at(0, c) = h_title[c];
        pair.at(1, c) = h_body[c];
    }
    auto pooled = layers::attention_pool(model.art_attn, pair, cache ? &cache->art_attn : nullptr);
    Tensor mask = apply_dropout(pooled.pooled, model.hyper, dropout_rng);

    DocumentEncoding out;
    out.vec = std::move(pooled.pooled);
    out.trace = std::move(body_enc.trace);
    out.trace.has_article_weights = true;
    out.trace.title_weight = pooled.weights[0];
    out.trace.body_weight = pooled.weights[1];
    out.trace.title_word_weights = std::move(title_enc.word_weights);
    if (cache) {
        cache->dropout_mask = std::move(mask);
        cache->valid = true;
    }
    return out;
}

DocumentEncoding encode_article(const HanModel& model, const std::vector<std::size_t>& title,
                                const std::vector<std::vector<std::size_t>>& body,
                                ArticleCache* cache, RngState* dropout_rng) {
    return model.variant == Variant::v1
               ? encode_article_v1(model, title, body, cache, dropout_rng)
               : encode_article_v2(model, title, body, cache, dropout_rng);
}

Tensor classify(const HanModel& model, const Tensor& v_article, layers::DenseCache* cache) {
    return layers::dense_softmax(model.classifier, v_article, cache);
}

ModelGradients grads_like(const HanModel& model) {
    ModelGradients g;
    g.embedding = Tensor::matrix(model.embedding.vocab_size(), model.embedding.dim());
    g.word_fwd = layers::gru_grads_like(model.word_fwd);
    g.word_bwd = layers::gru_grads_like(model.word_bwd);
    g.word_attn = layers::attention_grads_like(model.word_attn);
    g.sent_fwd = layers::gru_grads_like(model.sent_fwd);
    g.sent_bwd = layers::gru_grads_like(model.sent_bwd);
    g.sent_attn = layers::attention_grads_like(model.sent_attn);
    if (model.variant == Variant::v2) {
        g.art_fwd = layers::gru_grads_like(model.art_fwd);
        g.art_bwd = layers::gru_grads_like(model.art_bwd);
        if (model.separate_article_grus) {
            g.art_fwd_body = layers::gru_grads_like(model.art_fwd_body);
            g.art_bwd_body = layers::gru_grads_like(model.art_bwd_body);
        }
        g.art_attn = layers::attention_grads_like(model.art_attn);
    }
    g.classifier = layers::dense_grads_like(model.classifier);
    return g;
}

void model_backward_into(const HanModel& model, const ArticleCache& cache,
                         const layers::DenseCache& classifier_cache, const Tensor& d_logits,
                         ModelGradients& grads) {
    if (!cache.valid) throw StateError("model_backward: missing forward cache");
    auto dense = layers::dense_backward_from_logits(model.classifier, classifier_cache, d_logits);
    grads.classifier.weights.add_scaled(dense.grads.weights, 1.0);
    grads.classifier.bias.add_scaled(dense.grads.bias, 1.0);
    Tensor d_v = std::move(dense.d_input);

    if (cache.variant == Variant::v1) {
        document_backward(model, cache.doc, std::move(d_v), grads);
        return;
    }

    backprop_dropout(d_v, cache.dropout_mask);
    Tensor d_pair;
    layers::attention_pool_backward_into(model.art_attn, cache.art_attn, d_v, Tensor(),
                                         grads.art_attn, d_pair);

    Tensor d_s_title, d_d_body;
    if (model.joint_article_sequence) {
        Tensor d_xs;
        layers::bigru_backward_into(model.art_fwd, model.art_bwd, cache.title_art, d_pair,
                                    grads.art_fwd, grads.art_bwd, d_xs);
        d_s_title = row_of(d_xs, 0);
        d_d_body = row_of(d_xs, 1);
    } else {
        Tensor d_h_title = Tensor::matrix(1, d_pair.cols());
        Tensor d_h_body = Tensor::matrix(1, d_pair.cols());
        for (std::size_t c = 0; c < d_pair.cols(); ++c) {
            d_h_title.at(0, c) = d_pair.at(0, c);
            d_h_body.at(0, c) = d_pair.at(1, c);
        }
        Tensor d_xs;
        layers::bigru_backward_into(model.art_fwd, model.art_bwd, cache.title_art, d_h_title,
                                    grads.art_fwd, grads.art_bwd, d_xs);
        d_s_title = row_of(d_xs, 0);
        layers::GruGrads& body_fwd_g = model.separate_article_grus ? grads.art_fwd_body : grads.art_fwd;
        layers::GruGrads& body_bwd_g = model.separate_article_grus ? grads.art_bwd_body : grads.art_bwd;
        const layers::GruParams& body_fwd = model.separate_article_grus ? model.art_fwd_body : model.art_fwd;
        const layers::GruParams& body_bwd = model.separate_article_grus ? model.art_bwd_body : model.art_bwd;
        layers::bigru_backward_into(body_fwd, body_bwd, cache.body_art, d_h_body, body_fwd_g,
                                    body_bwd_g, d_xs);
        d_d_body = row_of(d_xs, 0);
    }

    sentence_backward(model, cache.title, std::move(d_s_title), grads);
    document_backward(model, cache.doc, std::move(d_d_body), grads);
}

ModelGradients model_backward(const HanModel& model, const ArticleCache& cache,
                              const layers::DenseCache& classifier_cache,
                              const Tensor& d_logits) {
    ModelGradients grads = grads_like(model);
    model_backward_into(model, cache, classifier_cache, d_logits, grads);
    return grads;
}

namespace {

template <typename Refs, typename Model>
void collect_refs(Model& m, Refs& out) {
    auto gru = [&out](const std::string& prefix, auto& p) {
        out.push_back({prefix + ".w_z", &p.w_z});
        out.push_back({prefix + ".w_r", &p.w_r});
        out.push_back({prefix + ".w_h", &p.w_h});
        out.push_back({prefix + ".u_z", &p.u_z});
        out.push_back({prefix + ".u_r", &p.u_r});
        out.push_back({prefix + ".u_h", &p.u_h});
        out.push_back({prefix + ".b_z", &p.b_z});
        out.push_back({prefix + ".b_r", &p.b_r});
        out.push_back({prefix + ".b_h", &p.b_h});
    };
    auto attn = [&out](const std::string& prefix, auto& p) {
        out.push_back({prefix + ".w_proj", &p.w_proj});
        out.push_back({prefix + ".b_proj", &p.b_proj});
        out.push_back({prefix + ".context", &p.context});
    };
    gru("word_fwd", m.word_fwd);
    gru("word_bwd", m.word_bwd);
    attn("word_attn", m.word_attn);
    gru("sent_fwd", m.sent_fwd);
    gru("sent_bwd", m.sent_bwd);
    attn("sent_attn", m.sent_attn);
    if (m.variant == Variant::v2) {
        gru("art_fwd", m.art_fwd);
        gru("art_bwd", m.art_bwd);
        if (m.separate_article_grus) {
            gru("art_fwd_body", m.art_fwd_body);
            gru("art_bwd_body", m.art_bwd_body);
        }
        attn("art_attn", m.art_attn);
    }
    out.push_back({"classifier.weights", &m.classifier.weights});
    out.push_back({"classifier.bias", &m.classifier.bias});
}

}  // namespace

std::vector<NamedTensorRef> parameter_refs(HanModel& model) {
    std::vector<NamedTensorRef> out;
    out.push_back({"embedding", &model.embedding.weights});
    collect_refs(model, out);
    return out;
}

std::vector<NamedTensorCRef> parameter_refs(const HanModel& model) {
    std::vector<NamedTensorCRef> out;
    out.push_back({"embedding", &model.embedding.weights});
    collect_refs(model, out);
    return out;
}

std::vector<NamedTensorRef> gradient_refs(ModelGradients& grads, const HanModel& model) {
    std::vector<NamedTensorRef> out;
    out.push_back({"embedding", &grads.embedding});
    struct View {
        Variant variant;
        bool separate_article_grus;
        layers::GruGrads& word_fwd;
        layers::GruGrads& word_bwd;
        layers::AttentionGrads& word_attn;
        layers::GruGrads& sent_fwd;
        layers::GruGrads& sent_bwd;
        layers::AttentionGrads& sent_attn;
        layers::GruGrads& art_fwd;
        layers::GruGrads& art_bwd;
        layers::GruGrads& art_fwd_body;
        layers::GruGrads& art_bwd_body;
        layers::AttentionGrads& art_attn;
        layers::DenseGrads& classifier;
    } view{model.variant, model.separate_article_grus,
           grads.word_fwd, grads.word_bwd, grads.word_attn,
           grads.sent_fwd, grads.sent_bwd, grads.sent_attn,
           grads.art_fwd,  grads.art_bwd,  grads.art_fwd_body,
           grads.art_bwd_body, grads.art_attn, grads.classifier};
    collect_refs(view, out);
    return out;
}

void scale_gradients(ModelGradients& grads, double s) {
    grads.embedding.scale(s);
    auto scale_gru = [s](layers::GruGrads& g) {
        g.w_z.scale(s); g.w_r.scale(s); g.w_h.scale(s);
        g.u_z.scale(s); g.u_r.scale(s); g.u_h.scale(s);
        g.b_z.scale(s); g.b_r.scale(s); g.b_h.scale(s);
    };
    auto scale_attn = [s](layers::AttentionGrads& g) {
        g.w_proj.scale(s); g.b_proj.scale(s); g.context.scale(s);
    };
    scale_gru(grads.word_fwd); scale_gru(grads.word_bwd);
    scale_attn(grads.word_attn);
    scale_gru(grads.sent_fwd); scale_gru(grads.sent_bwd);
    scale_attn(grads.sent_attn);
    if (!grads.art_fwd.b_z.empty()) { scale_gru(grads.art_fwd); scale_gru(grads.art_bwd); }
    if (!grads.art_fwd_body.b_z.empty()) { scale_gru(grads.art_fwd_body); scale_gru(grads.art_bwd_body); }
    if (!grads.art_attn.context.empty()) scale_attn(grads.art_attn);
    grads.classifier.weights.scale(s);
    grads.classifier.bias.scale(s);
}

void accumulate_gradients(ModelGradients& into, const ModelGradients& from, double scale) {
    into.embedding.add_scaled(from.embedding, scale);
    auto acc_gru = [scale](layers::GruGrads& a, const layers::GruGrads& b) {
        a.w_z.add_scaled(b.w_z, scale); a.w_r.add_scaled(b.w_r, scale); a.w_h.add_scaled(b.w_h, scale);
        a.u_z.add_scaled(b.u_z, scale); a.u_r.add_scaled(b.u_r, scale); a.u_h.add_scaled(b.u_h, scale);
        a.b_z.add_scaled(b.b_z, scale); a.b_r.add_scaled(b.b_r, scale); a.b_h.add_scaled(b.b_h, scale);
    };
    auto acc_attn = [scale](layers::AttentionGrads& a, const layers::AttentionGrads& b) {
        a.w_proj.add_scaled(b.w_proj, scale);
        a.b_proj.add_scaled(b.b_proj, scale);
        a.context.add_scaled(b.context, scale);
    };
    acc_gru(into.word_fwd, from.word_fwd);
    acc_gru(into.word_bwd, from.word_bwd);
    acc_attn(into.word_attn, from.word_attn);
    acc_gru(into.sent_fwd, from.sent_fwd);
    acc_gru(into.sent_bwd, from.sent_bwd);
    acc_attn(into.sent_attn, from.sent_attn);
    if (!into.art_fwd.b_z.empty()) {
        acc_gru(into.art_fwd, from.art_fwd);
        acc_gru(into.art_bwd, from.art_bwd);
    }
    if (!into.art_fwd_body.b_z.empty()) {
        acc_gru(into.art_fwd_body, from.art_fwd_body);
        acc_gru(into.art_bwd_body, from.art_bwd_body);
    }
    if (!into.art_attn.context.empty()) acc_attn(into.art_attn, from.art_attn);
    into.classifier.weights.add_scaled(from.classifier.weights, scale);
    into.classifier.bias.add_scaled(from.classifier.bias, scale);
}

}  // namespace hanforge::encoders
