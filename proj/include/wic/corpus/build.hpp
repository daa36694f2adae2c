#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wic/corpus/align.hpp"
#include "wic/corpus/embedding_table.hpp"
#include "wic/corpus/filter.hpp"
#include "wic/corpus/records.hpp"
#include "wic/provider/provider.hpp"

namespace wic::corpus {

struct CorpusStats {
  std::size_t lines_read = 0;
  std::size_t unreadable = 0;
  std::size_t candidates = 0;    // (pair, target) combinations tried
  std::size_t no_alignment = 0;
  std::size_t no_negative = 0;
  std::size_t cap = 0;
  std::size_t enhanced = 0;      // positives replaced via masked prediction
  std::size_t emitted = 0;
  std::size_t train = 0;
  std::size_t validation = 0;

  nlohmann::ordered_json to_json() const;
};

struct CorpusResult {
  std::vector<TrainingTriple> train;
  std::vector<TrainingTriple> validation;
  CorpusStats stats;
};

// Outcome of one (pair, target) attempt.
enum class Discard { none, no_alignment, no_negative };
struct Attempt {
  std::optional<TrainingTriple> triple;  // id left empty
  Discard reason = Discard::none;
  bool enhanced = false;
};

Attempt build_triple(const PairRecord& pair, std::size_t target, const provider::MaskedPredictor& predictor,
                     const EmbeddingTable& z, const FilterConfig& cfg);

// Source positions tried when a pair names no target: words that have an
// embedding and are not punctuation or numerals.
std::vector<std::size_t> eligible_targets(const std::vector<std::string>& tokens, const EmbeddingTable& z);

// Validation count for n triples: round(fraction·n), at least 1 once n ≥ 2.
std::size_t validation_count(std::size_t n, double fraction);

// Per-pair work may run on `threads` workers; results are merged in input
// order, then the per-target cap and the seeded split run serially.
CorpusResult build_corpus(std::istream& pairs, const provider::MaskedPredictor& predictor, const EmbeddingTable& z,
                          const FilterConfig& cfg, std::size_t threads = 1);

}  // namespace wic::corpus
