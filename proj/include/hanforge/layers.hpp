#pragma once

#include <cstddef>
#include <vector>

#include "hanforge/tensor.hpp"

namespace hanforge::layers {

using hanforge::RngState;
using hanforge::Tensor;

// ---------------------------------------------------------------------------
// Parameter bundles
// ---------------------------------------------------------------------------

struct EmbeddingMatrix {
    Tensor weights;  // V x d, row 0 is the PAD row and stays zero
    bool trainable = true;

    std::size_t vocab_size() const { return weights.rows(); }
    std::size_t dim() const { return weights.cols(); }
};

// Gate parameters of one GRU direction. Hidden size H, input size d_in.
struct GruParams {
    Tensor w_z, w_r, w_h;  // H x d_in
    Tensor u_z, u_r, u_h;  // H x H
    Tensor b_z, b_r, b_h;  // H

    std::size_t hidden_size() const { return b_z.size(); }
    std::size_t input_size() const { return w_z.cols(); }
};

// Projection + context vector of one attention level.
struct AttentionParams {
    Tensor w_proj;   // A x D
    Tensor b_proj;   // A (zero by default; the projection works without it)
    Tensor context;  // A

    std::size_t attn_size() const { return context.size(); }
    std::size_t annot_size() const { return w_proj.cols(); }
};

struct DenseParams {
    Tensor weights;  // C x D
    Tensor bias;     // C

    std::size_t classes() const { return bias.size(); }
    std::size_t input_size() const { return weights.cols(); }
};

// Gradient bundles mirror their parameter bundles exactly.
struct GruGrads {
    Tensor w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h;
};
struct AttentionGrads {
    Tensor w_proj, b_proj, context;
};
struct DenseGrads {
    Tensor weights, bias;
};

GruParams gru_init(std::size_t hidden, std::size_t input, RngState& rng);
AttentionParams attention_init(std::size_t attn, std::size_t annot, RngState& rng);
DenseParams dense_init(std::size_t classes, std::size_t input, RngState& rng);

GruGrads gru_grads_like(const GruParams& p);
AttentionGrads attention_grads_like(const AttentionParams& p);
DenseGrads dense_grads_like(const DenseParams& p);

// ---------------------------------------------------------------------------
// Embedding lookup
// ---------------------------------------------------------------------------

// Rows of the embedding matrix selected by token id; row t is token t's vector.
Tensor embed_lookup(const EmbeddingMatrix& e, const std::vector<std::size_t>& token_ids);

// Scatter upstream row gradients back onto the embedding rows.
// d_rows is T x d; returns a dense V x d gradient.
Tensor embed_lookup_backward(const EmbeddingMatrix& e, const std::vector<std::size_t>& token_ids,
                             const Tensor& d_rows);
// Accumulating variant used by the model backward pass.
void embed_lookup_backward_into(const std::vector<std::size_t>& token_ids, const Tensor& d_rows,
                                Tensor& grad_accum);

// ---------------------------------------------------------------------------
// GRU cell
// ---------------------------------------------------------------------------
// Gate convention (fixed for this project):
//   z = sigmoid(w_z x + u_z h_prev + b_z)
//   r = sigmoid(w_r x + u_r h_prev + b_r)
//   hc = tanh(w_h x + u_h (r . h_prev) + b_h)
//   h = (1 - z) . h_prev + z . hc

struct GruStepCache {
    Tensor x, h_prev, z, r, hc;
    bool valid = false;
};

Tensor gru_step(const GruParams& p, const Tensor& x, const Tensor& h_prev,
                GruStepCache* cache = nullptr);

struct GruStepBackwardResult {
    GruGrads grads;
    Tensor d_x;
    Tensor d_h_prev;
};
GruStepBackwardResult gru_step_backward(const GruParams& p, const GruStepCache& cache,
                                        const Tensor& d_h);
// Accumulating variant: adds parameter gradients into `grads`.
void gru_step_backward_into(const GruParams& p, const GruStepCache& cache, const Tensor& d_h,
                            GruGrads& grads, Tensor& d_x, Tensor& d_h_prev);

// ---------------------------------------------------------------------------
// Bidirectional GRU
// ---------------------------------------------------------------------------

struct BigruCache {
    std::vector<GruStepCache> fwd_steps, bwd_steps;  // bwd_steps[i] consumed xs row T-1-i
    bool valid = false;
};

// Row t of the result concatenates the forward state after x_0..x_t and the
// backward state after x_{T-1}..x_t. Initial states are zero.
Tensor bigru_forward(const GruParams& fwd, const GruParams& bwd, const Tensor& xs,
                     BigruCache* cache = nullptr);

struct BigruBackwardResult {
    GruGrads fwd_grads, bwd_grads;
    Tensor d_xs;  // T x d_in
};
BigruBackwardResult bigru_backward(const GruParams& fwd, const GruParams& bwd,
                                   const BigruCache& cache, const Tensor& d_annotations);
void bigru_backward_into(const GruParams& fwd, const GruParams& bwd, const BigruCache& cache,
                         const Tensor& d_annotations, GruGrads& fwd_grads, GruGrads& bwd_grads,
                         Tensor& d_xs);

// ---------------------------------------------------------------------------
// Attention pooling
// ---------------------------------------------------------------------------
//   u_t = tanh(w_proj a_t + b_proj)
//   weights = softmax_t(u_t . context)
//   pooled = sum_t weights_t a_t

struct AttentionCache {
    Tensor annotations;  // T x D
    Tensor projected;    // T x A, the tanh outputs
    Tensor weights;      // T
    bool valid = false;
};

struct AttentionResult {
    Tensor pooled;   // D
    Tensor weights;  // T
};

AttentionResult attention_pool(const AttentionParams& p, const Tensor& annotations,
                               AttentionCache* cache = nullptr);

struct AttentionBackwardResult {
    AttentionGrads grads;
    Tensor d_annotations;  // T x D
};
// d_weights may be empty (treated as zero) when only the pooled vector feeds
// downstream computation.
AttentionBackwardResult attention_pool_backward(const AttentionParams& p,
                                                const AttentionCache& cache,
                                                const Tensor& d_pooled,
                                                const Tensor& d_weights = Tensor());
void attention_pool_backward_into(const AttentionParams& p, const AttentionCache& cache,
                                  const Tensor& d_pooled, const Tensor& d_weights,
                                  AttentionGrads& grads, Tensor& d_annotations);

// ---------------------------------------------------------------------------
// Dense softmax classifier
// ---------------------------------------------------------------------------

struct DenseCache {
    Tensor input;   // D
    Tensor probs;   // C
    bool valid = false;
};

Tensor dense_softmax(const DenseParams& p, const Tensor& v, DenseCache* cache = nullptr);

struct DenseBackwardResult {
    DenseGrads grads;
    Tensor d_input;
};
// Backward through softmax and the affine map, from a gradient w.r.t. the
// output probabilities.
DenseBackwardResult dense_softmax_backward(const DenseParams& p, const DenseCache& cache,
                                           const Tensor& d_probs);
// Shortcut used by cross-entropy training, where the gradient w.r.t. the
// pre-softmax logits is available in closed form.
DenseBackwardResult dense_backward_from_logits(const DenseParams& p, const DenseCache& cache,
                                               const Tensor& d_logits);

}  // namespace hanforge::layers
