#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wic/mode.hpp"
#include "wic/nncore/encoder.hpp"
#include "wic/nncore/param_store.hpp"
#include "wic/util/rng.hpp"

namespace wic::distiller {

struct DistillerConfig {
  std::size_t dim = 16;
  std::size_t num_rows = 2;  // selected layers, ℓ − k + 1
  std::size_t heads = 8;
  std::size_t ffn_mult = 4;
  double dropout = 0.1;
  double ln_eps = 1e-5;
  std::uint64_t seed = 0;

  // Defaults per setting: FFN ×4 monolingual, ×6 crosslingual.
  static DistillerConfig for_mode(Mode mode, std::size_t dim, std::size_t num_hidden_layers);

  nn::EncoderConfig encoder() const;
  void validate() const;
  friend bool operator==(const DistillerConfig&, const DistillerConfig&) = default;
};

template <class T>
struct DistilledPair {
  std::vector<T> meaning;
  std::vector<T> context;
};

template <class T>
struct DistilCache {
  nn::EncoderCache<T> meaning;
  nn::EncoderCache<T> context;
  std::size_t rows = 0;
};

// Meaning and context distillers: each a single transformer encoder layer
// followed by mean pooling, reading the selected layers of one target word
// plus a learned layer-position table shared by both.
template <class T>
class DistillerModel {
 public:
  static DistillerModel init(const DistillerConfig& config);

  DistillerConfig config;
  nn::EncoderWeights<T> meaning;
  nn::EncoderWeights<T> context;
  nn::Tensor2D<T> layer_pos;

  nn::EncoderWeights<T> meaning_grad;
  nn::EncoderWeights<T> context_grad;
  nn::Tensor2D<T> layer_pos_grad;

  DistilledPair<T> distil(const nn::Tensor2D<T>& top_layers, bool training, Rng* rng,
                          DistilCache<T>* cache = nullptr) const;

  // Accumulates parameter gradients given dL/dh^m and dL/dh^c. The input
  // hidden states are frozen and receive nothing.
  void backward(const DistilCache<T>& cache, std::span<const T> d_meaning, std::span<const T> d_context);

  nn::ParamStore<T> params();
  void zero_grad();

  template <class U>
  DistillerModel<U> cast() const {
    DistillerModel<U> out;
    out.config = config;
    out.meaning = meaning.template cast<U>();
    out.context = context.template cast<U>();
    out.layer_pos = layer_pos.template cast<U>();
    out.meaning_grad = nn::EncoderWeights<U>::zeros_like(out.meaning);
    out.context_grad = nn::EncoderWeights<U>::zeros_like(out.context);
    out.layer_pos_grad = nn::Tensor2D<U>(layer_pos.rows(), layer_pos.cols());
    return out;
  }
};

// Mean of the selected layers: the reconstruction target and the baseline
// representation.
template <class T>
std::vector<T> reconstruction_target(const nn::Tensor2D<T>& top_layers);

// Elementwise mean of the meaning and context vectors.
template <class T>
std::vector<T> reconstruct(const DistilledPair<T>& pair);

template <class T>
std::vector<T> reconstruct(std::span<const T> meaning, std::span<const T> context);

}  // namespace wic::distiller
