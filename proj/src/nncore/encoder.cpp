#include "wic/nncore/encoder.hpp"

#include <cmath>
#include <random>
#include <string>

#include "wic/simd/kernels.hpp"

namespace wic::nn {

void EncoderConfig::validate() const {
  if (dim == 0 || heads == 0 || ffn_mult == 0) throw ConfigError("encoder: dim, heads and ffn_mult must be positive");
  if (dim % heads != 0) {
    throw ConfigError("encoder: dim " + std::to_string(dim) + " not divisible by " + std::to_string(heads) + " heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must lie in [0, 1)");
  if (!(ln_eps > 0.0)) throw ConfigError("encoder: layer-norm eps must be positive");
}

namespace {

template <class T>
Tensor2D<T> uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  std::uniform_real_distribution<double> unif(-bound, bound);
  Tensor2D<T> m(rows, cols);
  for (T& v : m.flat()) v = static_cast<T>(unif(rng));
  return m;
}

template <class T>
std::span<const T> vec(const Tensor2D<T>& t) {
  return t.flat();
}

template <class T>
std::span<T> vec(Tensor2D<T>& t) {
  return t.flat();
}

}  // namespace

template <class T>
EncoderWeights<T> EncoderWeights<T>::init(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  const std::size_t m = cfg.dim * cfg.ffn_mult;
  EncoderWeights w;
  w.wq = uniform_matrix<T>(d, d, rng);
  w.wk = uniform_matrix<T>(d, d, rng);
  w.wv = uniform_matrix<T>(d, d, rng);
  w.wo = uniform_matrix<T>(d, d, rng);
  w.bq = Tensor2D<T>(1, d);
  w.bk = Tensor2D<T>(1, d);
  w.bv = Tensor2D<T>(1, d);
  w.bo = Tensor2D<T>(1, d);
  w.ln1_gamma = Tensor2D<T>(1, d, T(1));
  w.ln1_beta = Tensor2D<T>(1, d);
  w.w1 = uniform_matrix<T>(d, m, rng);
  w.b1 = Tensor2D<T>(1, m);
  w.w2 = uniform_matrix<T>(m, d, rng);
  w.b2 = Tensor2D<T>(1, d);
  w.ln2_gamma = Tensor2D<T>(1, d, T(1));
  w.ln2_beta = Tensor2D<T>(1, d);
  return w;
}

template <class T>
EncoderWeights<T> EncoderWeights<T>::zeros_like(const EncoderWeights& other) {
  EncoderWeights out = other;
  out.visit([](std::string_view, Tensor2D<T>& t) { t.fill(T(0)); });
  return out;
}

template <class T>
Tensor2D<T> multi_head_self_attention(const Tensor2D<T>& x, const EncoderWeights<T>& w, std::size_t num_heads,
                                      T dropout_rate, bool training, Rng* rng, AttentionCache<T>* cache) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (num_heads == 0 || d % num_heads != 0) {
    throw ConfigError("attention: width " + std::to_string(d) + " not divisible by " + std::to_string(num_heads) +
                      " heads");
  }
  const std::size_t dh = d / num_heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  Tensor2D<T> q = linear(x, w.wq, vec(w.bq));
  Tensor2D<T> k = linear(x, w.wk, vec(w.bk));
  Tensor2D<T> v = linear(x, w.wv, vec(w.bv));
  Tensor2D<T> context(n, d);
  std::vector<Tensor2D<T>> probs;
  probs.reserve(num_heads);

  for (std::size_t h = 0; h < num_heads; ++h) {
    const std::size_t off = h * dh;
    Tensor2D<T> scores(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) scores(i, j) = scale * simd::dot(&q(i, off), &k(j, off), dh);
    }
    Tensor2D<T> p = softmax_rows(scores);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) simd::axpy(p(i, j), &v(j, off), &context(i, off), dh);
    }
    probs.push_back(std::move(p));
  }

  Tensor2D<T> projected = linear(context, w.wo, vec(w.bo));
  Tensor2D<T> mask;
  Tensor2D<T> out = dropout(projected, dropout_rate, training, rng, mask);
  if (cache) {
    cache->x = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
    cache->dropout_mask = std::move(mask);
  }
  return out;
}

template <class T>
Tensor2D<T> multi_head_self_attention_backward(const AttentionCache<T>& c, const EncoderWeights<T>& w,
                                               std::size_t num_heads, const Tensor2D<T>& dy,
                                               EncoderWeights<T>& g) {
  const std::size_t n = c.x.rows();
  const std::size_t d = c.x.cols();
  const std::size_t dh = d / num_heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  Tensor2D<T> dproj = dropout_backward(dy, c.dropout_mask);
  Tensor2D<T> dcontext = linear_backward(c.context, w.wo, dproj, g.wo, vec(g.bo));

  Tensor2D<T> dq(n, d), dk(n, d), dv(n, d);
  for (std::size_t h = 0; h < num_heads; ++h) {
    const std::size_t off = h * dh;
    const Tensor2D<T>& p = c.probs[h];
    Tensor2D<T> dp(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        dp(i, j) = simd::dot(&dcontext(i, off), &c.v(j, off), dh);
        simd::axpy(p(i, j), &dcontext(i, off), &dv(j, off), dh);
      }
    }
    Tensor2D<T> ds = softmax_rows_backward(p, dp);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const T s = scale * ds(i, j);
        if (s == T(0)) continue;
        simd::axpy(s, &c.k(j, off), &dq(i, off), dh);
        simd::axpy(s, &c.q(i, off), &dk(j, off), dh);
      }
    }
  }

  Tensor2D<T> dx = linear_backward(c.x, w.wq, dq, g.wq, vec(g.bq));
  add_inplace(dx, linear_backward(c.x, w.wk, dk, g.wk, vec(g.bk)));
  add_inplace(dx, linear_backward(c.x, w.wv, dv, g.wv, vec(g.bv)));
  return dx;
}

template <class T>
Tensor2D<T> transformer_encoder_layer(const Tensor2D<T>& x, const EncoderWeights<T>& w, const EncoderConfig& cfg,
                                      bool training, Rng* rng, EncoderCache<T>* cache) {
  if (x.rows() == 0) throw PreconditionError("transformer_encoder_layer: empty input");
  if (x.cols() != cfg.dim) {
    throw DimensionError("transformer_encoder_layer: input " + x.shape_str() + " vs dim " + std::to_string(cfg.dim));
  }
  const T rate = static_cast<T>(cfg.dropout);
  const T eps = static_cast<T>(cfg.ln_eps);

  Tensor2D<T> attn = multi_head_self_attention(x, w, cfg.heads, rate, training, rng, cache ? &cache->attn : nullptr);
  Tensor2D<T> r1 = add(x, attn);
  Tensor2D<T> y1 = layer_norm(r1, vec(w.ln1_gamma), vec(w.ln1_beta), eps, cache ? &cache->ln1 : nullptr);

  Tensor2D<T> pre = linear(y1, w.w1, vec(w.b1));
  Tensor2D<T> act = gelu(pre);
  Tensor2D<T> ffn = linear(act, w.w2, vec(w.b2));
  Tensor2D<T> mask;
  Tensor2D<T> ffn_dropped = dropout(ffn, rate, training, rng, mask);
  Tensor2D<T> r2 = add(y1, ffn_dropped);
  Tensor2D<T> y = layer_norm(r2, vec(w.ln2_gamma), vec(w.ln2_beta), eps, cache ? &cache->ln2 : nullptr);

  if (cache) {
    cache->y1 = std::move(y1);
    cache->ffn_pre = std::move(pre);
    cache->ffn_act = std::move(act);
    cache->ffn_dropout_mask = std::move(mask);
  }
  return y;
}

template <class T>
Tensor2D<T> transformer_encoder_layer_backward(const EncoderCache<T>& c, const EncoderWeights<T>& w,
                                               const EncoderConfig& cfg, const Tensor2D<T>& dy,
                                               EncoderWeights<T>& g) {
  Tensor2D<T> dr2 = layer_norm_backward(c.ln2, vec(w.ln2_gamma), dy, vec(g.ln2_gamma), vec(g.ln2_beta));
  // r2 = y1 + dropout(ffn(y1))
  Tensor2D<T> dffn = dropout_backward(dr2, c.ffn_dropout_mask);
  Tensor2D<T> dact = linear_backward(c.ffn_act, w.w2, dffn, g.w2, vec(g.b2));
  Tensor2D<T> dpre = gelu_backward(c.ffn_pre, dact);
  Tensor2D<T> dy1 = linear_backward(c.y1, w.w1, dpre, g.w1, vec(g.b1));
  add_inplace(dy1, dr2);

  Tensor2D<T> dr1 = layer_norm_backward(c.ln1, vec(w.ln1_gamma), dy1, vec(g.ln1_gamma), vec(g.ln1_beta));
  // r1 = x + mhsa(x)
  Tensor2D<T> dx = multi_head_self_attention_backward(c.attn, w, cfg.heads, dr1, g);
  add_inplace(dx, dr1);
  return dx;
}

template struct EncoderWeights<float>;
template struct EncoderWeights<double>;

#define WIC_INSTANTIATE_ENCODER(T)                                                                                \
  template Tensor2D<T> multi_head_self_attention(const Tensor2D<T>&, const EncoderWeights<T>&, std::size_t, T,   \
                                                 bool, Rng*, AttentionCache<T>*);                                 \
  template Tensor2D<T> multi_head_self_attention_backward(const AttentionCache<T>&, const EncoderWeights<T>&,    \
                                                          std::size_t, const Tensor2D<T>&, EncoderWeights<T>&);   \
  template Tensor2D<T> transformer_encoder_layer(const Tensor2D<T>&, const EncoderWeights<T>&,                   \
                                                 const EncoderConfig&, bool, Rng*, EncoderCache<T>*);             \
  template Tensor2D<T> transformer_encoder_layer_backward(const EncoderCache<T>&, const EncoderWeights<T>&,      \
                                                          const EncoderConfig&, const Tensor2D<T>&,               \
                                                          EncoderWeights<T>&);

WIC_INSTANTIATE_ENCODER(float)
WIC_INSTANTIATE_ENCODER(double)

#undef WIC_INSTANTIATE_ENCODER

}  // namespace wic::nn
