#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wic/provider/hidden_stack.hpp"

namespace wic::provider {

// Source of frozen hidden states. Implementations are read-only after
// construction and safe for concurrent encode() calls.
class HiddenStateProvider {
 public:
  virtual ~HiddenStateProvider() = default;

  // `key` identifies the sentence for file-backed providers; `target` is a
  // word-level span to be mapped onto subwords.
  virtual HiddenStack encode(std::string_view key, const std::vector<std::string>& words,
                             std::optional<Span> target) const = 0;

  virtual std::size_t num_hidden_layers() const = 0;
  virtual std::size_t dim() const = 0;

  // Hash of everything that determines the provider's outputs.
  virtual std::uint64_t fingerprint() const = 0;
};

class MaskedPredictor {
 public:
  virtual ~MaskedPredictor() = default;
  // Masks word `word_index` (as one mask token) and predicts it.
  virtual MaskedPredictionSet predict_masked(const std::vector<std::string>& words, std::size_t word_index) const = 0;
};

}  // namespace wic::provider
