#include "hanforge/layers.hpp"

#include <cmath>
#include <string>

namespace hanforge::layers {

namespace {

Tensor zeros_like(const Tensor& t) {
    Tensor z = t;
    z.fill(0.0);
    return z;
}

void require_cache(bool valid, const char* op) {
    if (!valid) throw StateError(std::string(op) + ": backward called without a cached forward pass");
}

}  // namespace

GruParams gru_init(std::size_t hidden, std::size_t input, RngState& rng) {
    GruParams p;
    p.w_z = glorot_init(hidden, input, rng);
    p.w_r = glorot_init(hidden, input, rng);
    p.w_h = glorot_init(hidden, input, rng);
    p.u_z = glorot_init(hidden, hidden, rng);
    p.u_r = glorot_init(hidden, hidden, rng);
    p.u_h = glorot_init(hidden, hidden, rng);
    p.b_z = Tensor::vector(hidden);
    p.b_r = Tensor::vector(hidden);
    p.b_h = Tensor::vector(hidden);
    return p;
}

AttentionParams attention_init(std::size_t attn, std::size_t annot, RngState& rng) {
    AttentionParams p;
    p.w_proj = glorot_init(attn, annot, rng);
    p.b_proj = Tensor::vector(attn);
    double a = std::sqrt(6.0 / static_cast<double>(attn + 1));
    p.context = Tensor::vector(attn);
    double norm = 0.0;
    do {
        for (std::size_t i = 0; i < attn; ++i) {
            p.context[i] = rng.next_uniform(-a, a);
            norm += p.context[i] * p.context[i];
        }
    } while (norm == 0.0);
    return p;
}

DenseParams dense_init(std::size_t classes, std::size_t input, RngState& rng) {
    DenseParams p;
    p.weights = glorot_init(classes, input, rng);
    p.bias = Tensor::vector(classes);
    return p;
}

GruGrads gru_grads_like(const GruParams& p) {
    return GruGrads{zeros_like(p.w_z), zeros_like(p.w_r), zeros_like(p.w_h),
                    zeros_like(p.u_z), zeros_like(p.u_r), zeros_like(p.u_h),
                    zeros_like(p.b_z), zeros_like(p.b_r), zeros_like(p.b_h)};
}

AttentionGrads attention_grads_like(const AttentionParams& p) {
    return AttentionGrads{zeros_like(p.w_proj), zeros_like(p.b_proj), zeros_like(p.context)};
}

DenseGrads dense_grads_like(const DenseParams& p) {
    return DenseGrads{zeros_like(p.weights), zeros_like(p.bias)};
}

Tensor embed_lookup(const EmbeddingMatrix& e, const std::vector<std::size_t>& token_ids) {
    Tensor out = Tensor::matrix(token_ids.size(), e.dim());
    for (std::size_t t = 0; t < token_ids.size(); ++t) {
        std::size_t id = token_ids[t];
        if (id >= e.vocab_size())
            throw IndexError("embed_lookup: token id " + std::to_string(id) + " at position " +
                             std::to_string(t) + " outside vocabulary of size " +
                             std::to_string(e.vocab_size()));
        const double* src = e.weights.row(id);
        double* dst = out.row(t);
        for (std::size_t c = 0; c < e.dim(); ++c) dst[c] = src[c];
    }
    return out;
}

Tensor embed_lookup_backward(const EmbeddingMatrix& e, const std::vector<std::size_t>& token_ids,
                             const Tensor& d_rows) {
    Tensor grad = Tensor::matrix(e.vocab_size(), e.dim());
    embed_lookup_backward_into(token_ids, d_rows, grad);
    return grad;
}

void embed_lookup_backward_into(const std::vector<std::size_t>& token_ids, const Tensor& d_rows,
                                Tensor& grad_accum) {
    if (d_rows.rows() != token_ids.size() || d_rows.cols() != grad_accum.cols())
        throw DimensionError("embed_lookup_backward: upstream gradient " + d_rows.shape_str() +
                             " does not match " + std::to_string(token_ids.size()) + " ids x " +
                             grad_accum.shape_str());
    for (std::size_t t = 0; t < token_ids.size(); ++t) {
        double* dst = grad_accum.row(token_ids[t]);
        const double* src = d_rows.row(t);
        for (std::size_t c = 0; c < d_rows.cols(); ++c) dst[c] += src[c];
    }
}

Tensor gru_step(const GruParams& p, const Tensor& x, const Tensor& h_prev, GruStepCache* cache) {
    if (x.size() != p.input_size() || h_prev.size() != p.hidden_size())
        throw DimensionError("gru_step: input " + x.shape_str() + " / state " +
                             h_prev.shape_str() + " inconsistent with params expecting [" +
                             std::to_string(p.input_size()) + "] / [" +
                             std::to_string(p.hidden_size()) + "]");
    std::size_t H = p.hidden_size();
    Tensor z = matvec(p.w_z, x);
    Tensor r = matvec(p.w_r, x);
    Tensor hc = matvec(p.w_h, x);
    Tensor uz = matvec(p.u_z, h_prev);
    Tensor ur = matvec(p.u_r, h_prev);
    for (std::size_t i = 0; i < H; ++i) {
        z[i] = 1.0 / (1.0 + std::exp(-(z[i] + uz[i] + p.b_z[i])));
        r[i] = 1.0 / (1.0 + std::exp(-(r[i] + ur[i] + p.b_r[i])));
    }
    Tensor rh = hadamard(r, h_prev);
    Tensor uh = matvec(p.u_h, rh);
    Tensor h = Tensor::vector(H);
    for (std::size_t i = 0; i < H; ++i) {
        hc[i] = std::tanh(hc[i] + uh[i] + p.b_h[i]);
        h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hc[i];
    }
    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->z = z;
        cache->r = r;
        cache->hc = hc;
        cache->valid = true;
    }
    return h;
}

void gru_step_backward_into(const GruParams& p, const GruStepCache& cache, const Tensor& d_h,
                            GruGrads& grads, Tensor& d_x, Tensor& d_h_prev) {
    require_cache(cache.valid, "gru_step_backward");
    std::size_t H = p.hidden_size();
    const Tensor& z = cache.z;
    const Tensor& r = cache.r;
    const Tensor& hc = cache.hc;
    const Tensor& h_prev = cache.h_prev;

    // h = (1-z) . h_prev + z . hc
    Tensor da_z = Tensor::vector(H);  // gradient at the update-gate preactivation
    Tensor da_h = Tensor::vector(H);  // gradient at the candidate preactivation
    d_h_prev = Tensor::vector(H);
    for (std::size_t i = 0; i < H; ++i) {
        double dz = d_h[i] * (hc[i] - h_prev[i]);
        double dhc = d_h[i] * z[i];
        d_h_prev[i] = d_h[i] * (1.0 - z[i]);
        da_z[i] = dz * z[i] * (1.0 - z[i]);
        da_h[i] = dhc * (1.0 - hc[i] * hc[i]);
    }

    // candidate: a_h = w_h x + u_h (r . h_prev) + b_h
    Tensor rh = hadamard(r, h_prev);
    Tensor d_rh = matvec_transposed(p.u_h, da_h);
    Tensor da_r = Tensor::vector(H);
    for (std::size_t i = 0; i < H; ++i) {
        d_h_prev[i] += d_rh[i] * r[i];
        da_r[i] = d_rh[i] * h_prev[i] * r[i] * (1.0 - r[i]);
    }

    grads.w_z.add_scaled(outer(da_z, cache.x), 1.0);
    grads.w_r.add_scaled(outer(da_r, cache.x), 1.0);
    grads.w_h.add_scaled(outer(da_h, cache.x), 1.0);
    grads.u_z.add_scaled(outer(da_z, h_prev), 1.0);
    grads.u_r.add_scaled(outer(da_r, h_prev), 1.0);
    grads.u_h.add_scaled(outer(da_h, rh), 1.0);
    grads.b_z.add_scaled(da_z, 1.0);
    grads.b_r.add_scaled(da_r, 1.0);
    grads.b_h.add_scaled(da_h, 1.0);

    Tensor dhp_gates = add(matvec_transposed(p.u_z, da_z), matvec_transposed(p.u_r, da_r));
    d_h_prev.add_scaled(dhp_gates, 1.0);

    d_x = matvec_transposed(p.w_z, da_z);
    d_x.add_scaled(matvec_transposed(p.w_r, da_r), 1.0);
    d_x.add_scaled(matvec_transposed(p.w_h, da_h), 1.0);
}

GruStepBackwardResult gru_step_backward(const GruParams& p, const GruStepCache& cache,
                                        const Tensor& d_h) {
    GruStepBackwardResult res;
    res.grads = gru_grads_like(p);
    gru_step_backward_into(p, cache, d_h, res.grads, res.d_x, res.d_h_prev);
    return res;
}

Tensor bigru_forward(const GruParams& fwd, const GruParams& bwd, const Tensor& xs,
                     BigruCache* cache) {
    if (xs.rank() != 2 || xs.rows() == 0)
        throw DomainError("bigru_forward: expects a nonempty T x d_in sequence, got " +
                          xs.shape_str());
    std::size_t T = xs.rows();
    std::size_t H = fwd.hidden_size();
    Tensor out = Tensor::matrix(T, 2 * H);
    if (cache) {
        cache->fwd_steps.assign(T, GruStepCache());
        cache->bwd_steps.assign(T, GruStepCache());
    }

    Tensor x = Tensor::vector(xs.cols());
    Tensor h = Tensor::vector(H);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < xs.cols(); ++c) x[c] = xs.at(t, c);
        h = gru_step(fwd, x, h, cache ? &cache->fwd_steps[t] : nullptr);
        for (std::size_t i = 0; i < H; ++i) out.at(t, i) = h[i];
    }
    h = Tensor::vector(bwd.hidden_size());
    for (std::size_t s = 0; s < T; ++s) {
        std::size_t t = T - 1 - s;
        for (std::size_t c = 0; c < xs.cols(); ++c) x[c] = xs.at(t, c);
        h = gru_step(bwd, x, h, cache ? &cache->bwd_steps[s] : nullptr);
        for (std::size_t i = 0; i < H; ++i) out.at(t, H + i) = h[i];
    }
    if (cache) cache->valid = true;
    return out;
}

void bigru_backward_into(const GruParams& fwd, const GruParams& bwd, const BigruCache& cache,
                         const Tensor& d_annotations, GruGrads& fwd_grads, GruGrads& bwd_grads,
                         Tensor& d_xs) {
    require_cache(cache.valid, "bigru_backward");
    std::size_t T = cache.fwd_steps.size();
    std::size_t H = fwd.hidden_size();
    if (d_annotations.rows() != T || d_annotations.cols() != 2 * H)
        throw DimensionError("bigru_backward: upstream gradient " + d_annotations.shape_str() +
                             " does not match " + std::to_string(T) + "x" + std::to_string(2 * H));
    std::size_t d_in = cache.fwd_steps[0].x.size();
    d_xs = Tensor::matrix(T, d_in);

    // forward direction, unrolled from the last step
    Tensor carry = Tensor::vector(H);
    Tensor d_h = Tensor::vector(H);
    Tensor d_x, d_h_prev;
    for (std::size_t s = 0; s < T; ++s) {
        std::size_t t = T - 1 - s;
        for (std::size_t i = 0; i < H; ++i) d_h[i] = d_annotations.at(t, i) + carry[i];
        gru_step_backward_into(fwd, cache.fwd_steps[t], d_h, fwd_grads, d_x, d_h_prev);
        carry = d_h_prev;
        for (std::size_t c = 0; c < d_in; ++c) d_xs.at(t, c) += d_x[c];
    }

    // backward direction: step s consumed xs row T-1-s, so unroll from s = T-1
    carry = Tensor::vector(H);
    for (std::size_t s = T; s-- > 0;) {
        std::size_t t = T - 1 - s;
        for (std::size_t i = 0; i < H; ++i) d_h[i] = d_annotations.at(t, H + i) + carry[i];
        gru_step_backward_into(bwd, cache.bwd_steps[s], d_h, bwd_grads, d_x, d_h_prev);
        carry = d_h_prev;
        for (std::size_t c = 0; c < d_in; ++c) d_xs.at(t, c) += d_x[c];
    }
}

BigruBackwardResult bigru_backward(const GruParams& fwd, const GruParams& bwd,
                                   const BigruCache& cache, const Tensor& d_annotations) {
    BigruBackwardResult res;
    res.fwd_grads = gru_grads_like(fwd);
    res.bwd_grads = gru_grads_like(bwd);
    bigru_backward_into(fwd, bwd, cache, d_annotations, res.fwd_grads, res.bwd_grads, res.d_xs);
    return res;
}

AttentionResult attention_pool(const AttentionParams& p, const Tensor& annotations,
                               AttentionCache* cache) {
    if (annotations.rank() != 2 || annotations.rows() == 0)
        throw DomainError("attention_pool: expects a nonempty T x D annotation matrix, got " +
                          annotations.shape_str());
    if (annotations.cols() != p.annot_size())
        throw DimensionError("attention_pool: annotations " + annotations.shape_str() +
                             " inconsistent with projection " + p.w_proj.shape_str());
    std::size_t T = annotations.rows();
    std::size_t D = annotations.cols();
    std::size_t A = p.attn_size();

    Tensor projected = Tensor::matrix(T, A);
    Tensor scores = Tensor::vector(T);
    Tensor a_t = Tensor::vector(D);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < D; ++c) a_t[c] = annotations.at(t, c);
        Tensor u = matvec(p.w_proj, a_t);
        double score = 0.0;
        for (std::size_t i = 0; i < A; ++i) {
            double v = std::tanh(u[i] + p.b_proj[i]);
            projected.at(t, i) = v;
            score += v * p.context[i];
        }
        scores[t] = score;
    }
    Tensor weights = softmax(scores);

    Tensor pooled = Tensor::vector(D);
    for (std::size_t t = 0; t < T; ++t) {
        double w = weights[t];
        const double* row = annotations.row(t);
        for (std::size_t c = 0; c < D; ++c) pooled[c] += w * row[c];
    }
    if (cache) {
        cache->annotations = annotations;
        cache->projected = projected;
        cache->weights = weights;
        cache->valid = true;
    }
    return {pooled, weights};
}

void attention_pool_backward_into(const AttentionParams& p, const AttentionCache& cache,
                                  const Tensor& d_pooled, const Tensor& d_weights,
                                  AttentionGrads& grads, Tensor& d_annotations) {
    require_cache(cache.valid, "attention_pool_backward");
    std::size_t T = cache.annotations.rows();
    std::size_t D = cache.annotations.cols();
    std::size_t A = p.attn_size();
    const Tensor& w = cache.weights;

    // pooled = sum_t w_t a_t
    d_annotations = Tensor::matrix(T, D);
    Tensor d_w = Tensor::vector(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double* a = cache.annotations.row(t);
        double* da = d_annotations.row(t);
        double dw = 0.0;
        for (std::size_t c = 0; c < D; ++c) {
            da[c] = w[t] * d_pooled[c];
            dw += a[c] * d_pooled[c];
        }
        d_w[t] = dw;
        if (d_weights.size() == T) d_w[t] += d_weights[t];
    }

    // softmax backward: d_score_t = w_t (d_w_t - sum_k d_w_k w_k)
    double mix = 0.0;
    for (std::size_t t = 0; t < T; ++t) mix += d_w[t] * w[t];

    Tensor a_t = Tensor::vector(D);
    for (std::size_t t = 0; t < T; ++t) {
        double d_score = w[t] * (d_w[t] - mix);
        // score_t = projected_t . context
        Tensor du = Tensor::vector(A);
        for (std::size_t i = 0; i < A; ++i) {
            double u = cache.projected.at(t, i);
            grads.context[i] += d_score * u;
            du[i] = d_score * p.context[i] * (1.0 - u * u);  // through tanh
        }
        for (std::size_t c = 0; c < D; ++c) a_t[c] = cache.annotations.at(t, c);
        grads.w_proj.add_scaled(outer(du, a_t), 1.0);
        grads.b_proj.add_scaled(du, 1.0);
        Tensor back = matvec_transposed(p.w_proj, du);
        double* da = d_annotations.row(t);
        for (std::size_t c = 0; c < D; ++c) da[c] += back[c];
    }
}

AttentionBackwardResult attention_pool_backward(const AttentionParams& p,
                                                const AttentionCache& cache,
                                                const Tensor& d_pooled, const Tensor& d_weights) {
    AttentionBackwardResult res;
    res.grads = attention_grads_like(p);
    attention_pool_backward_into(p, cache, d_pooled, d_weights, res.grads, res.d_annotations);
    return res;
}

Tensor dense_softmax(const DenseParams& p, const Tensor& v, DenseCache* cache) {
    if (v.size() != p.input_size())
        throw DimensionError("dense_softmax: input " + v.shape_str() +
                             " inconsistent with weights " + p.weights.shape_str());
    Tensor logits = matvec(p.weights, v);
    logits.add_scaled(p.bias, 1.0);
    Tensor probs = softmax(logits);
    if (cache) {
        cache->input = v;
        cache->probs = probs;
        cache->valid = true;
    }
    return probs;
}

DenseBackwardResult dense_backward_from_logits(const DenseParams& p, const DenseCache& cache,
                                               const Tensor& d_logits) {
    require_cache(cache.valid, "dense_backward");
    DenseBackwardResult res;
    res.grads.weights = outer(d_logits, cache.input);
    res.grads.bias = d_logits;
    res.d_input = matvec_transposed(p.weights, d_logits);
    return res;
}

DenseBackwardResult dense_softmax_backward(const DenseParams& p, const DenseCache& cache,
                                           const Tensor& d_probs) {
    require_cache(cache.valid, "dense_softmax_backward");
    const Tensor& probs = cache.probs;
    double mix = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) mix += d_probs[i] * probs[i];
    Tensor d_logits = Tensor::vector(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) d_logits[i] = probs[i] * (d_probs[i] - mix);
    return dense_backward_from_logits(p, cache, d_logits);
}

}  // namespace hanforge::layers
