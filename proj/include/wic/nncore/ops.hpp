#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wic/nncore/tensor.hpp"
#include "wic/util/rng.hpp"

namespace wic::nn {

// ---- matrix products (kernels dispatched through wic::simd) ----

// out = a · b
template <class T>
Tensor2D<T> matmul(const Tensor2D<T>& a, const Tensor2D<T>& b);

// acc += aᵀ · b
template <class T>
void matmul_tn_accumulate(const Tensor2D<T>& a, const Tensor2D<T>& b, Tensor2D<T>& acc);

// out = a · bᵀ
template <class T>
Tensor2D<T> matmul_nt(const Tensor2D<T>& a, const Tensor2D<T>& b);

// ---- linear ----

// y = xW + b, b broadcast over rows.
template <class T>
Tensor2D<T> linear(const Tensor2D<T>& x, const Tensor2D<T>& w, std::span<const T> b);

// Accumulates dW, db; returns dx (skipped when want_dx is false).
template <class T>
Tensor2D<T> linear_backward(const Tensor2D<T>& x, const Tensor2D<T>& w, const Tensor2D<T>& dy, Tensor2D<T>& dw,
                            std::span<T> db, bool want_dx = true);

// ---- layer norm ----

template <class T>
struct LayerNormCache {
  Tensor2D<T> xhat;
  std::vector<T> inv_std;
};

template <class T>
Tensor2D<T> layer_norm(const Tensor2D<T>& x, std::span<const T> gamma, std::span<const T> beta, T eps,
                       LayerNormCache<T>* cache = nullptr);

template <class T>
Tensor2D<T> layer_norm_backward(const LayerNormCache<T>& cache, std::span<const T> gamma, const Tensor2D<T>& dy,
                                std::span<T> dgamma, std::span<T> dbeta);

// ---- softmax ----

template <class T>
Tensor2D<T> softmax_rows(const Tensor2D<T>& x);

// dX given softmax output P and upstream dP, row-wise.
template <class T>
Tensor2D<T> softmax_rows_backward(const Tensor2D<T>& p, const Tensor2D<T>& dp);

// ---- GELU (exact, erf form) ----

template <class T>
Tensor2D<T> gelu(const Tensor2D<T>& x);

template <class T>
Tensor2D<T> gelu_backward(const Tensor2D<T>& x, const Tensor2D<T>& dy);

// ---- dropout ----

// Inverted dropout. With training=false or rate=0 returns x unchanged and
// leaves mask empty. Otherwise mask holds 0 or 1/(1-rate) per element.
template <class T>
Tensor2D<T> dropout(const Tensor2D<T>& x, T rate, bool training, Rng* rng, Tensor2D<T>& mask);

template <class T>
Tensor2D<T> dropout_backward(const Tensor2D<T>& dy, const Tensor2D<T>& mask);

// ---- elementwise / pooling ----

template <class T>
Tensor2D<T> add(const Tensor2D<T>& a, const Tensor2D<T>& b);

template <class T>
void add_inplace(Tensor2D<T>& acc, const Tensor2D<T>& b);

// Column mean over rows.
template <class T>
std::vector<T> mean_pool(const Tensor2D<T>& rows);

// Spreads dvec/n to each of n rows.
template <class T>
Tensor2D<T> mean_pool_backward(std::size_t n, std::span<const T> dvec);

}  // namespace wic::nn
