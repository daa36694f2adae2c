#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wic/corpus/embedding_table.hpp"
#include "wic/corpus/filter_config.hpp"
#include "wic/provider/hidden_stack.hpp"

namespace wic::corpus {

using provider::MaskedPredictionSet;

// Levenshtein distance over UTF-8 code points.
std::size_t edit_distance(std::string_view a, std::string_view b);

// The first top_k predictions whose probability exceeds delta, in order.
struct Candidate {
  std::string token;
  double prob = 0.0;
};
std::vector<Candidate> top_candidates(const MaskedPredictionSet& preds, const FilterConfig& cfg);

// First candidate τ ≠ w_t (case-insensitive), not punctuation or a numeral,
// with an embedding and cos(τ, w_t) < λ.
std::optional<std::string> select_negative_mono(const MaskedPredictionSet& preds, const std::string& w_t,
                                                const EmbeddingTable& z, const FilterConfig& cfg);

// True when w_p is close enough in surface to w_t that enhancement is tried.
bool enhancement_gate(const std::string& w_t, const std::string& w_p, const FilterConfig& cfg);

// Replacement for w_p drawn from predictions at the masked w_p: first τ with
// τ ∉ {w_t, w_p}, ED(τ, w_t) > gate and cos(τ, w_t) ≥ λ. nullopt keeps w_p,
// including when the gate is closed.
std::optional<std::string> enhance_positive_mono(const MaskedPredictionSet& preds, const std::string& w_t,
                                                 const std::string& w_p, const EmbeddingTable& z,
                                                 const FilterConfig& cfg);

// Highest-probability candidate (predictions at the masked w_p) with
// cos(c, w_p) below the candidate-set mean and cos(c, w_t) < cos(w_p, w_t).
std::optional<std::string> select_negative_xl(const MaskedPredictionSet& preds, const std::string& w_t,
                                              const std::string& w_p, const EmbeddingTable& z,
                                              const FilterConfig& cfg);

}  // namespace wic::corpus
