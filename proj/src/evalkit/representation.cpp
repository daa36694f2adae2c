#include "wic/evalkit/representation.hpp"

#include <cmath>

#include "wic/corpus/embedding_table.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/log.hpp"

namespace wic::evalkit {

std::string_view to_string(RepKind k) {
  switch (k) {
    case RepKind::baseline: return "baseline";
    case RepKind::meaning: return "meaning";
    case RepKind::context: return "context";
  }
  return "?";
}

RepKind parse_rep_kind(std::string_view s) {
  if (s == "baseline") return RepKind::baseline;
  if (s == "meaning") return RepKind::meaning;
  if (s == "context") return RepKind::context;
  throw ConfigError("unknown representation kind '" + std::string(s) + "' (expected baseline|meaning|context)");
}

RepresentationSource::RepresentationSource(RepKind kind, const provider::HiddenStateProvider& provider,
                                           const distiller::DistillerModel<float>* model)
    : kind_(kind), provider_(provider), model_(model) {
  if (kind != RepKind::baseline && !model) {
    throw ConfigError(std::string(to_string(kind)) + " representations need a trained checkpoint");
  }
}

provider::HiddenStack RepresentationSource::encode(const SentenceRef& s) const {
  return provider_.encode(s.key, s.words, s.target);
}

std::vector<float> RepresentationSource::span_rep(const provider::HiddenStack& stack, provider::Span span) const {
  const auto top = provider::select_top_layers(provider::pool_subwords(stack, span), stack.num_hidden_layers());
  if (kind_ == RepKind::baseline) return distiller::reconstruction_target(top);
  auto pair = model_->distil(top, false, nullptr);
  return kind_ == RepKind::meaning ? std::move(pair.meaning) : std::move(pair.context);
}

std::vector<float> RepresentationSource::target_rep(const provider::HiddenStack& stack) const {
  if (!stack.target_span) throw PreconditionError("target_rep: stack '" + stack.sentence_id + "' has no target");
  return span_rep(stack, *stack.target_span);
}

std::vector<float> RepresentationSource::sentence_rep(const provider::HiddenStack& stack) const {
  std::vector<double> acc(stack.dim, 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < stack.num_subwords(); ++i) {
    if (stack.special_mask[i]) continue;
    const auto v = span_rep(stack, {i, i + 1});
    for (std::size_t j = 0; j < v.size(); ++j) acc[j] += v[j];
    ++n;
  }
  if (n == 0) throw PreconditionError("sentence_rep: '" + stack.sentence_id + "' has only special tokens");
  std::vector<float> out(stack.dim);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<float>(acc[j] / double(n));
  return out;
}

double similarity(const std::vector<float>& a, const std::vector<float>& b) {
  const double c = corpus::cosine(a, b);
  if (c == 0.0) {
    double na = 0, nb = 0;
    for (float v : a) na += double(v) * v;
    for (float v : b) nb += double(v) * v;
    if (na == 0.0 || nb == 0.0) log::warn("similarity: zero vector, similarity set to 0");
  }
  return c;
}

double word_similarity(const RepresentationSource& src, const SentenceRef& a, const SentenceRef& b) {
  return similarity(src.target_rep(src.encode(a)), src.target_rep(src.encode(b)));
}

}  // namespace wic::evalkit
