#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wic/nncore/param_store.hpp"

namespace wic::nn {

struct GradCheckOptions {
  double step = 1e-4;
  double tol = 1e-4;
  // 0 checks every coordinate; otherwise a seeded sample of this many per parameter.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckFailure {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  bool passed = true;
  std::size_t coords_checked = 0;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::vector<GradCheckFailure> failures;  // capped at 20 entries
  std::string diagnostic;                  // set when the loss went non-finite
};

// Compares analytic gradients against central differences
// (L(θ+h) − L(θ−h)) / 2h, scoring |analytic − numeric| / max(1, |analytic|).
// `compute_grads` must zero and then fill every gradient slot in `params`.
GradCheckReport check_gradients(ParamStore<double>& params, const std::function<double()>& loss,
                                const std::function<void()>& compute_grads, const GradCheckOptions& opts = {});

}  // namespace wic::nn
