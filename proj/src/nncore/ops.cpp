#include "wic/nncore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wic/simd/kernels.hpp"

namespace wic::nn {

template <class T>
Tensor2D<T> matmul(const Tensor2D<T>& a, const Tensor2D<T>& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: " + a.shape_str() + " · " + b.shape_str());
  Tensor2D<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* dst = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T s = a(i, k);
      if (s != T(0)) simd::axpy(s, b.row(k).data(), dst, b.cols());
    }
  }
  return out;
}

template <class T>
void matmul_tn_accumulate(const Tensor2D<T>& a, const Tensor2D<T>& b, Tensor2D<T>& acc) {
  if (a.rows() != b.rows() || acc.rows() != a.cols() || acc.cols() != b.cols()) {
    throw DimensionError("matmul_tn: " + a.shape_str() + "ᵀ · " + b.shape_str() + " into " + acc.shape_str());
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* src = b.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T s = a(i, k);
      if (s != T(0)) simd::axpy(s, src, acc.row(k).data(), b.cols());
    }
  }
}

template <class T>
Tensor2D<T> matmul_nt(const Tensor2D<T>& a, const Tensor2D<T>& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: " + a.shape_str() + " · " + b.shape_str() + "ᵀ");
  Tensor2D<T> out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < b.rows(); ++k) out(i, k) = simd::dot(a.row(i).data(), b.row(k).data(), a.cols());
  }
  return out;
}

template <class T>
Tensor2D<T> linear(const Tensor2D<T>& x, const Tensor2D<T>& w, std::span<const T> b) {
  if (x.cols() != w.rows()) {
    throw DimensionError("linear: input " + x.shape_str() + " incompatible with weight " + w.shape_str());
  }
  if (b.size() != w.cols()) {
    throw DimensionError("linear: bias length " + std::to_string(b.size()) + " != weight cols " +
                         std::to_string(w.cols()) + " (weight " + w.shape_str() + ")");
  }
  Tensor2D<T> y = matmul(x, w);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return y;
}

template <class T>
Tensor2D<T> linear_backward(const Tensor2D<T>& x, const Tensor2D<T>& w, const Tensor2D<T>& dy, Tensor2D<T>& dw,
                            std::span<T> db, bool want_dx) {
  if (dy.rows() != x.rows() || dy.cols() != w.cols()) {
    throw DimensionError("linear_backward: upstream " + dy.shape_str() + " vs output " + std::to_string(x.rows()) +
                         "x" + std::to_string(w.cols()));
  }
  matmul_tn_accumulate(x, dy, dw);
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    auto r = dy.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) db[j] += r[j];
  }
  if (!want_dx) return {};
  return matmul_nt(dy, w);
}

template <class T>
Tensor2D<T> layer_norm(const Tensor2D<T>& x, std::span<const T> gamma, std::span<const T> beta, T eps,
                       LayerNormCache<T>* cache) {
  if (gamma.size() != x.cols() || beta.size() != x.cols()) {
    throw DimensionError("layer_norm: gamma/beta length " + std::to_string(gamma.size()) + "/" +
                         std::to_string(beta.size()) + " vs input " + x.shape_str());
  }
  if (!(eps > T(0))) throw ConfigError("layer_norm: eps must be positive");
  const std::size_t n = x.cols();
  Tensor2D<T> y(x.rows(), n);
  if (cache) {
    cache->xhat = Tensor2D<T>(x.rows(), n);
    cache->inv_std.assign(x.rows(), T(0));
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    T mean = 0;
    for (T v : r) mean += v;
    mean /= static_cast<T>(n);
    T var = 0;
    for (T v : r) var += (v - mean) * (v - mean);
    var /= static_cast<T>(n);
    const T inv = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      const T xh = (r[j] - mean) * inv;
      y(i, j) = xh * gamma[j] + beta[j];
      if (cache) cache->xhat(i, j) = xh;
    }
    if (cache) cache->inv_std[i] = inv;
  }
  return y;
}

template <class T>
Tensor2D<T> layer_norm_backward(const LayerNormCache<T>& cache, std::span<const T> gamma, const Tensor2D<T>& dy,
                                std::span<T> dgamma, std::span<T> dbeta) {
  require_same_shape(cache.xhat, dy, "layer_norm_backward");
  const std::size_t n = dy.cols();
  Tensor2D<T> dx(dy.rows(), n);
  std::vector<T> dxhat(n);
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    T mean_d = 0;
    T mean_dx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const T g = dy(i, j);
      dgamma[j] += g * cache.xhat(i, j);
      dbeta[j] += g;
      dxhat[j] = g * gamma[j];
      mean_d += dxhat[j];
      mean_dx += dxhat[j] * cache.xhat(i, j);
    }
    mean_d /= static_cast<T>(n);
    mean_dx /= static_cast<T>(n);
    const T inv = cache.inv_std[i];
    for (std::size_t j = 0; j < n; ++j) dx(i, j) = inv * (dxhat[j] - mean_d - cache.xhat(i, j) * mean_dx);
  }
  return dx;
}

template <class T>
Tensor2D<T> softmax_rows(const Tensor2D<T>& x) {
  Tensor2D<T> p(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    if (r.empty()) continue;
    const T m = *std::max_element(r.begin(), r.end());
    T sum = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const T e = std::exp(r[j] - m);
      p(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < r.size(); ++j) p(i, j) /= sum;
  }
  return p;
}

template <class T>
Tensor2D<T> softmax_rows_backward(const Tensor2D<T>& p, const Tensor2D<T>& dp) {
  require_same_shape(p, dp, "softmax_rows_backward");
  Tensor2D<T> dx(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const T s = simd::dot(p.row(i).data(), dp.row(i).data(), p.cols());
    for (std::size_t j = 0; j < p.cols(); ++j) dx(i, j) = p(i, j) * (dp(i, j) - s);
  }
  return dx;
}

template <class T>
Tensor2D<T> gelu(const Tensor2D<T>& x) {
  Tensor2D<T> y(x.rows(), x.cols());
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  auto src = x.flat();
  auto dst = y.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = T(0.5) * src[i] * (T(1) + std::erf(src[i] * inv_sqrt2));
  return y;
}

template <class T>
Tensor2D<T> gelu_backward(const Tensor2D<T>& x, const Tensor2D<T>& dy) {
  require_same_shape(x, dy, "gelu_backward");
  Tensor2D<T> dx(x.rows(), x.cols());
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  const T inv_sqrt2pi = static_cast<T>(1.0 / std::sqrt(2.0 * std::numbers::pi));
  auto src = x.flat();
  auto up = dy.flat();
  auto dst = dx.flat();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const T v = src[i];
    const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
    dst[i] = up[i] * (cdf + v * pdf);
  }
  return dx;
}

template <class T>
Tensor2D<T> dropout(const Tensor2D<T>& x, T rate, bool training, Rng* rng, Tensor2D<T>& mask) {
  if (!training || rate <= T(0)) {
    mask = Tensor2D<T>();
    return x;
  }
  if (rate >= T(1)) throw ConfigError("dropout: rate must be < 1");
  if (!rng) throw PreconditionError("dropout: training with rate > 0 needs a random generator");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const T keep_scale = T(1) / (T(1) - rate);
  mask = Tensor2D<T>(x.rows(), x.cols());
  Tensor2D<T> y(x.rows(), x.cols());
  auto m = mask.flat();
  auto src = x.flat();
  auto dst = y.flat();
  for (std::size_t i = 0; i < src.size(); ++i) {
    m[i] = unif(*rng) < static_cast<double>(rate) ? T(0) : keep_scale;
    dst[i] = src[i] * m[i];
  }
  return y;
}

template <class T>
Tensor2D<T> dropout_backward(const Tensor2D<T>& dy, const Tensor2D<T>& mask) {
  if (mask.empty()) return dy;
  require_same_shape(dy, mask, "dropout_backward");
  Tensor2D<T> dx(dy.rows(), dy.cols());
  auto m = mask.flat();
  auto up = dy.flat();
  auto dst = dx.flat();
  for (std::size_t i = 0; i < up.size(); ++i) dst[i] = up[i] * m[i];
  return dx;
}

template <class T>
Tensor2D<T> add(const Tensor2D<T>& a, const Tensor2D<T>& b) {
  Tensor2D<T> out = a;
  add_inplace(out, b);
  return out;
}

template <class T>
void add_inplace(Tensor2D<T>& acc, const Tensor2D<T>& b) {
  require_same_shape(acc, b, "add");
  auto dst = acc.flat();
  auto src = b.flat();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <class T>
std::vector<T> mean_pool(const Tensor2D<T>& rows) {
  if (rows.rows() == 0) throw PreconditionError("mean_pool: needs at least one row");
  std::vector<T> out(rows.cols(), T(0));
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto r = rows.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j];
  }
  const T inv = T(1) / static_cast<T>(rows.rows());
  for (T& v : out) v *= inv;
  return out;
}

template <class T>
Tensor2D<T> mean_pool_backward(std::size_t n, std::span<const T> dvec) {
  if (n == 0) throw PreconditionError("mean_pool_backward: needs at least one row");
  Tensor2D<T> dx(n, dvec.size());
  const T inv = T(1) / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dvec.size(); ++j) dx(i, j) = dvec[j] * inv;
  }
  return dx;
}

#define WIC_INSTANTIATE_OPS(T)                                                                                     \
  template Tensor2D<T> matmul(const Tensor2D<T>&, const Tensor2D<T>&);                                            \
  template void matmul_tn_accumulate(const Tensor2D<T>&, const Tensor2D<T>&, Tensor2D<T>&);                       \
  template Tensor2D<T> matmul_nt(const Tensor2D<T>&, const Tensor2D<T>&);                                         \
  template Tensor2D<T> linear(const Tensor2D<T>&, const Tensor2D<T>&, std::span<const T>);                        \
  template Tensor2D<T> linear_backward(const Tensor2D<T>&, const Tensor2D<T>&, const Tensor2D<T>&, Tensor2D<T>&,  \
                                       std::span<T>, bool);                                                        \
  template Tensor2D<T> layer_norm(const Tensor2D<T>&, std::span<const T>, std::span<const T>, T,                  \
                                  LayerNormCache<T>*);                                                             \
  template Tensor2D<T> layer_norm_backward(const LayerNormCache<T>&, std::span<const T>, const Tensor2D<T>&,       \
                                           std::span<T>, std::span<T>);                                            \
  template Tensor2D<T> softmax_rows(const Tensor2D<T>&);                                                          \
  template Tensor2D<T> softmax_rows_backward(const Tensor2D<T>&, const Tensor2D<T>&);                             \
  template Tensor2D<T> gelu(const Tensor2D<T>&);                                                                  \
  template Tensor2D<T> gelu_backward(const Tensor2D<T>&, const Tensor2D<T>&);                                     \
  template Tensor2D<T> dropout(const Tensor2D<T>&, T, bool, Rng*, Tensor2D<T>&);                                  \
  template Tensor2D<T> dropout_backward(const Tensor2D<T>&, const Tensor2D<T>&);                                  \
  template Tensor2D<T> add(const Tensor2D<T>&, const Tensor2D<T>&);                                               \
  template void add_inplace(Tensor2D<T>&, const Tensor2D<T>&);                                                    \
  template std::vector<T> mean_pool(const Tensor2D<T>&);                                                          \
  template Tensor2D<T> mean_pool_backward(std::size_t, std::span<const T>);

WIC_INSTANTIATE_OPS(float)
WIC_INSTANTIATE_OPS(double)

#undef WIC_INSTANTIATE_OPS

}  // namespace wic::nn
