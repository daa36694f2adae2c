#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wic/evalkit/representation.hpp"
#include "wic/nncore/tensor.hpp"

namespace wic::evalkit {

// A sentence's words and one representation per word.
struct WordReps {
  std::vector<std::string> words;
  std::vector<std::vector<float>> reps;
};

struct BucketPair {
  WordReps a;
  WordReps b;
  bool paraphrase = false;
};

struct Bucket {
  std::optional<double> mean;  // absent when no word pair fell in the bucket
  std::size_t count = 0;
};

// Rows {common, different} × columns {paraphrase, non-paraphrase}.
struct BucketReport {
  std::array<std::array<Bucket, 2>, 2> cells;
  nlohmann::ordered_json to_json() const;
};

// Common: each word of `a` whose surface (case-insensitive) occurs in `b`,
// paired with its first occurrence there. Different: every cross-sentence
// pair with differing surfaces.
BucketReport bucketed_similarity(const std::vector<BucketPair>& pairs);

// Per-word representations, words recovered from the stack's subwords.
WordReps word_representations(const RepresentationSource& src, const SentenceRef& s);

// Rows baseline / meaning / context; column i is the corpus-mean cosine
// against the layer-i hidden state of the target (pooled over its subwords).
// Each input is one target's (ℓ+1)×d per-layer matrix.
nn::Tensor2D<double> layerwise_similarity(const distiller::DistillerModel<float>& model,
                                          const std::vector<nn::Tensor2D<float>>& targets,
                                          std::size_t num_hidden_layers);

}  // namespace wic::evalkit
