#pragma once

#include <cstddef>
#include <cstdint>

#include "wic/mode.hpp"

namespace wic::corpus {

struct FilterConfig {
  Mode mode = Mode::monolingual;
  double lambda = 0.6;           // cosine threshold for negatives / enhanced positives
  std::size_t top_k = 100;
  double delta = 0.003;          // minimum prediction probability (strict)
  double sigma_mult = 1.0;       // alignment: M[t][j] > μ + sigma_mult·σ
  double aligned_quantile = 0.674;  // xl: M[t][j] ≥ μ_A − aligned_quantile·σ_A
  std::size_t edit_gate = 3;
  std::size_t per_target_cap = 0;  // 0 = unlimited
  double validation_fraction = 0.01;
  std::uint64_t seed = 0;

  static FilterConfig for_mode(Mode mode);
  void validate() const;
};

}  // namespace wic::corpus
