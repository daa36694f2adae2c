#include "wic/provider/hidden_stack.hpp"

#include <cmath>
#include <string>

#include "wic/util/errors.hpp"

namespace wic::provider {

void HiddenStack::validate() const {
  const std::string where = "hidden stack '" + sentence_id + "': ";
  if (special_mask.size() != subword_tokens.size()) throw FormatError(where + "special_mask length != token count");
  if (layers == 0 || dim == 0) throw FormatError(where + "layers and dim must be positive");
  if (values.size() != subword_tokens.size() * layers * dim) {
    throw FormatError(where + "value count " + std::to_string(values.size()) + " != " +
                      std::to_string(subword_tokens.size()) + "x" + std::to_string(layers) + "x" +
                      std::to_string(dim));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw FormatError(where + "non-finite hidden value");
  }
  if (target_span) {
    if (target_span->start >= target_span->end || target_span->end > subword_tokens.size()) {
      throw FormatError(where + "target span [" + std::to_string(target_span->start) + ", " +
                        std::to_string(target_span->end) + ") invalid for " +
                        std::to_string(subword_tokens.size()) + " subwords");
    }
  }
}

nn::Tensor2D<float> pool_subwords(const HiddenStack& stack, Span span) {
  if (span.start >= span.end || span.end > stack.num_subwords()) {
    throw PreconditionError("pool_subwords: span out of range");
  }
  nn::Tensor2D<float> out(stack.layers, stack.dim);
  const float inv = 1.0f / static_cast<float>(span.size());
  for (std::size_t layer = 0; layer < stack.layers; ++layer) {
    auto dst = out.row(layer);
    for (std::size_t s = span.start; s < span.end; ++s) {
      auto src = stack.at(s, layer);
      for (std::size_t j = 0; j < stack.dim; ++j) dst[j] += src[j];
    }
    for (float& v : dst) v *= inv;
  }
  return out;
}

nn::Tensor2D<float> pool_target_subwords(const HiddenStack& stack) {
  if (!stack.target_span) {
    throw PreconditionError("pool_target_subwords: stack '" + stack.sentence_id + "' has no target span");
  }
  return pool_subwords(stack, *stack.target_span);
}

std::size_t top_half_start(std::size_t num_hidden_layers) {
  if (num_hidden_layers == 0 || num_hidden_layers % 2 != 0) {
    throw ConfigError("top-half layer policy needs an even, positive layer count; got " +
                      std::to_string(num_hidden_layers));
  }
  return num_hidden_layers / 2 + 1;
}

template <class T>
nn::Tensor2D<T> select_top_layers(const nn::Tensor2D<T>& per_layer, std::size_t num_hidden_layers) {
  const std::size_t k = top_half_start(num_hidden_layers);
  if (per_layer.rows() != num_hidden_layers + 1) {
    throw DimensionError("select_top_layers: expected " + std::to_string(num_hidden_layers + 1) + " rows, got " +
                         per_layer.shape_str());
  }
  const std::size_t n = num_hidden_layers - k + 1;
  nn::Tensor2D<T> out(n, per_layer.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto src = per_layer.row(k + i);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

template nn::Tensor2D<float> select_top_layers(const nn::Tensor2D<float>&, std::size_t);
template nn::Tensor2D<double> select_top_layers(const nn::Tensor2D<double>&, std::size_t);

std::vector<Span> word_spans(const HiddenStack& stack) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < stack.num_subwords(); ++i) {
    if (stack.special_mask[i]) continue;
    const bool continuation = stack.subword_tokens[i].rfind("##", 0) == 0;
    if (continuation && !spans.empty() && spans.back().end == i) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({i, i + 1});
    }
  }
  return spans;
}

}  // namespace wic::provider
