#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wic/corpus/embedding_table.hpp"
#include "wic/corpus/filter_config.hpp"

namespace wic::corpus {

inline constexpr double kNoEmbedding = -std::numeric_limits<double>::infinity();

// M[i][j] = cosine(Z(S[i]), Z(S_p[j])); kNoEmbedding where either word lacks a vector.
using SimilarityMatrix = std::vector<std::vector<double>>;

SimilarityMatrix similarity_matrix(const std::vector<std::string>& s, const std::vector<std::string>& s_p,
                                   const EmbeddingTable& z);

struct Alignment {
  SimilarityMatrix m;
  std::size_t target = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (i, j), i ≠ target
  std::vector<std::size_t> aligned;                         // A: the j side, ascending
  bool in_aligned(std::size_t j) const;
};

// Index of the row / column maximum over finite entries, lowest index on ties.
std::optional<std::size_t> row_argmax(const SimilarityMatrix& m, std::size_t i);
std::optional<std::size_t> col_argmax(const SimilarityMatrix& m, std::size_t j);

// Pairs (i, j) with i ≠ target, j = argmax M[i] and i = argmax M[·][j].
Alignment mutual_argmax_align(SimilarityMatrix m, std::size_t target);
Alignment mutual_argmax_align(const std::vector<std::string>& s, std::size_t target,
                              const std::vector<std::string>& s_p, const EmbeddingTable& z);

struct MatrixStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};

// Over every finite entry of M.
MatrixStats finite_stats(const SimilarityMatrix& m);

// Descending scan of M[t]; first j ∉ A with M[t][j] > μ + sigma_mult·σ.
std::optional<std::size_t> align_target_mono(const Alignment& a, const FilterConfig& cfg);

// Highest M[t][j] among j ∉ A with M[t][j] > μ + sigma_mult·σ and
// M[t][j] ≥ μ_A − aligned_quantile·σ_A (second test skipped when A is empty).
std::optional<std::size_t> align_target_xl(const Alignment& a, const FilterConfig& cfg);

}  // namespace wic::corpus
