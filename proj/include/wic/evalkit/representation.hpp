#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wic/distiller/model.hpp"
#include "wic/provider/provider.hpp"

namespace wic::evalkit {

enum class RepKind { baseline, meaning, context };

std::string_view to_string(RepKind k);
RepKind parse_rep_kind(std::string_view s);

// A sentence as handed to the provider: its lookup key, words and optional
// word-level target.
struct SentenceRef {
  std::string key;
  std::vector<std::string> words;
  std::optional<provider::Span> target;
};

// Turns provider output into vectors of one kind: the mean of the selected
// layers (baseline), or the meaning / context distillation of them.
class RepresentationSource {
 public:
  // `model` may be null only for the baseline kind.
  RepresentationSource(RepKind kind, const provider::HiddenStateProvider& provider,
                       const distiller::DistillerModel<float>* model);

  RepKind kind() const { return kind_; }
  const provider::HiddenStateProvider& provider() const { return provider_; }

  provider::HiddenStack encode(const SentenceRef& s) const;

  // Representation of the subword range `span`.
  std::vector<float> span_rep(const provider::HiddenStack& stack, provider::Span span) const;
  // Representation of the stack's target span.
  std::vector<float> target_rep(const provider::HiddenStack& stack) const;
  // Mean over non-special subwords, each represented on its own.
  std::vector<float> sentence_rep(const provider::HiddenStack& stack) const;

 private:
  RepKind kind_;
  const provider::HiddenStateProvider& provider_;
  const distiller::DistillerModel<float>* model_;
};

// Cosine of two representations; a zero vector yields 0 and a warning.
double similarity(const std::vector<float>& a, const std::vector<float>& b);

// Cosine of the two target representations.
double word_similarity(const RepresentationSource& src, const SentenceRef& a, const SentenceRef& b);

}  // namespace wic::evalkit
