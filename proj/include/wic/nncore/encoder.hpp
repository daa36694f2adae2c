#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "wic/nncore/ops.hpp"
#include "wic/nncore/tensor.hpp"
#include "wic/util/rng.hpp"

namespace wic::nn {

struct EncoderConfig {
  std::size_t dim = 16;
  std::size_t heads = 8;
  std::size_t ffn_mult = 4;
  double dropout = 0.1;
  double ln_eps = 1e-5;

  std::size_t head_dim() const { return dim / heads; }
  // Throws ConfigError on an indivisible head count or zero sizes.
  void validate() const;
};

// One post-norm transformer encoder layer. Biases and layer-norm vectors are
// stored as 1×n tensors.
template <class T>
struct EncoderWeights {
  Tensor2D<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor2D<T> ln1_gamma, ln1_beta;
  Tensor2D<T> w1, b1, w2, b2;
  Tensor2D<T> ln2_gamma, ln2_beta;

  // Projections ~ U(-1/√fan_in, 1/√fan_in); biases 0; gamma 1, beta 0.
  static EncoderWeights init(const EncoderConfig& cfg, Rng& rng);
  static EncoderWeights zeros_like(const EncoderWeights& other);

  template <class F>
  void visit(F&& f) {
    f("wq", wq); f("bq", bq); f("wk", wk); f("bk", bk);
    f("wv", wv); f("bv", bv); f("wo", wo); f("bo", bo);
    f("ln1.gamma", ln1_gamma); f("ln1.beta", ln1_beta);
    f("ffn.w1", w1); f("ffn.b1", b1); f("ffn.w2", w2); f("ffn.b2", b2);
    f("ln2.gamma", ln2_gamma); f("ln2.beta", ln2_beta);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<EncoderWeights*>(this)->visit([&](std::string_view n, const Tensor2D<T>& t) { f(n, t); });
  }

  template <class U>
  EncoderWeights<U> cast() const {
    EncoderWeights<U> out;
    out.wq = wq.template cast<U>(); out.bq = bq.template cast<U>();
    out.wk = wk.template cast<U>(); out.bk = bk.template cast<U>();
    out.wv = wv.template cast<U>(); out.bv = bv.template cast<U>();
    out.wo = wo.template cast<U>(); out.bo = bo.template cast<U>();
    out.ln1_gamma = ln1_gamma.template cast<U>(); out.ln1_beta = ln1_beta.template cast<U>();
    out.w1 = w1.template cast<U>(); out.b1 = b1.template cast<U>();
    out.w2 = w2.template cast<U>(); out.b2 = b2.template cast<U>();
    out.ln2_gamma = ln2_gamma.template cast<U>(); out.ln2_beta = ln2_beta.template cast<U>();
    return out;
  }
};

template <class T>
struct AttentionCache {
  Tensor2D<T> x, q, k, v;
  std::vector<Tensor2D<T>> probs;  // one n×n matrix per head
  Tensor2D<T> context;             // concatenated head outputs, before Wo
  Tensor2D<T> dropout_mask;
};

// Scaled dot-product self-attention over all heads, concatenated and
// projected by Wo. Dropout (if any) is applied to the projected output.
template <class T>
Tensor2D<T> multi_head_self_attention(const Tensor2D<T>& x, const EncoderWeights<T>& w, std::size_t num_heads,
                                      T dropout_rate, bool training, Rng* rng, AttentionCache<T>* cache = nullptr);

// Accumulates into grads; returns dx.
template <class T>
Tensor2D<T> multi_head_self_attention_backward(const AttentionCache<T>& cache, const EncoderWeights<T>& w,
                                               std::size_t num_heads, const Tensor2D<T>& dy,
                                               EncoderWeights<T>& grads);

template <class T>
struct EncoderCache {
  AttentionCache<T> attn;
  LayerNormCache<T> ln1;
  Tensor2D<T> y1;
  Tensor2D<T> ffn_pre;  // y1·W1 + b1
  Tensor2D<T> ffn_act;  // GELU(ffn_pre)
  Tensor2D<T> ffn_dropout_mask;
  LayerNormCache<T> ln2;
};

// y1 = LN(x + Dropout(MHSA(x)));  y = LN(y1 + Dropout(FFN(y1)))
template <class T>
Tensor2D<T> transformer_encoder_layer(const Tensor2D<T>& x, const EncoderWeights<T>& w, const EncoderConfig& cfg,
                                      bool training, Rng* rng, EncoderCache<T>* cache = nullptr);

template <class T>
Tensor2D<T> transformer_encoder_layer_backward(const EncoderCache<T>& cache, const EncoderWeights<T>& w,
                                               const EncoderConfig& cfg, const Tensor2D<T>& dy,
                                               EncoderWeights<T>& grads);

}  // namespace wic::nn
