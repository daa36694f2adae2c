#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wic/nncore/tensor.hpp"

namespace wic::provider {

// Half-open index range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

// Hidden outputs of a frozen MLM for one sentence, all layers. Layer 0 is
// the embedding layer; layers 1..ℓ are the transformer layers.
struct HiddenStack {
  std::string sentence_id;
  std::vector<std::string> subword_tokens;
  std::vector<std::uint8_t> special_mask;  // 1 for sentence markers / padding
  std::size_t layers = 0;                  // ℓ + 1
  std::size_t dim = 0;
  std::vector<float> values;               // subword-major: [subword][layer][dim]
  std::optional<Span> target_span;         // subword range of the target word

  std::size_t num_subwords() const { return subword_tokens.size(); }
  std::size_t num_hidden_layers() const { return layers == 0 ? 0 : layers - 1; }

  std::span<const float> at(std::size_t subword, std::size_t layer) const {
    return {values.data() + (subword * layers + layer) * dim, dim};
  }
  std::span<float> at(std::size_t subword, std::size_t layer) {
    return {values.data() + (subword * layers + layer) * dim, dim};
  }

  // Throws FormatError when sizes disagree, values are non-finite, or the
  // target span is empty / out of range.
  void validate() const;

  friend bool operator==(const HiddenStack&, const HiddenStack&) = default;
};

// Masked-token prediction over the whole vocabulary, sorted by descending
// probability.
struct MaskedPredictionSet {
  std::size_t position = 0;  // subword index that was masked
  std::vector<std::string> tokens;
  std::vector<double> probs;
  std::size_t vocab_size = 0;
};

// Layer-wise mean over the subwords of `span`: an (ℓ+1)×d matrix.
nn::Tensor2D<float> pool_subwords(const HiddenStack& stack, Span span);

// pool_subwords over the stack's target span; PreconditionError if absent.
nn::Tensor2D<float> pool_target_subwords(const HiddenStack& stack);

// First layer of the top half: k = ℓ/2 + 1.
std::size_t top_half_start(std::size_t num_hidden_layers);

// Rows k..ℓ of an (ℓ+1)×d per-layer matrix. ℓ must be even.
template <class T>
nn::Tensor2D<T> select_top_layers(const nn::Tensor2D<T>& per_layer, std::size_t num_hidden_layers);

// Word spans recovered from subword tokens, treating a "##" prefix as a
// continuation piece. Special positions are skipped.
std::vector<Span> word_spans(const HiddenStack& stack);

}  // namespace wic::provider
