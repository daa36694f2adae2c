#include "wic/nncore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wic/util/rng.hpp"

namespace wic::nn {

GradCheckReport check_gradients(ParamStore<double>& params, const std::function<double()>& loss,
                                const std::function<void()>& compute_grads, const GradCheckOptions& opts) {
  GradCheckReport report;
  compute_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.emplace_back(p.grad->values());

  Rng rng(mix_seed(opts.seed));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    std::vector<std::size_t> coords(p.value->size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (opts.max_coords_per_param != 0 && coords.size() > opts.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    auto values = p.value->flat();
    for (std::size_t idx : coords) {
      const double orig = values[idx];
      values[idx] = orig + opts.step;
      const double up = loss();
      values[idx] = orig - opts.step;
      const double down = loss();
      values[idx] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        report.passed = false;
        report.diagnostic = "non-finite loss while perturbing parameter '" + p.name + "' at index " +
                            std::to_string(idx);
        return report;
      }
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[pi][idx];
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
      }
      if (!(rel < opts.tol)) {
        report.passed = false;
        if (report.failures.size() < 20) report.failures.push_back({p.name, idx, a, numeric, rel});
      }
    }
  }
  return report;
}

}  // namespace wic::nn
