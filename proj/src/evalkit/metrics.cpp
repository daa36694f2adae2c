#include "wic/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wic/util/errors.hpp"
#include "wic/util/log.hpp"

namespace wic::evalkit {

double binary_accuracy(std::span<const double> sims, std::span<const int> labels, double threshold) {
  if (sims.size() != labels.size()) throw PreconditionError("binary_accuracy: length mismatch");
  if (sims.empty()) throw PreconditionError("binary_accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const int pred = sims[i] >= threshold ? 1 : 0;
    hit += pred == (labels[i] ? 1 : 0);
  }
  return double(hit) / double(sims.size());
}

double tune_threshold(std::span<const double> sims, std::span<const int> labels) {
  double best_thr = 0.0;
  double best_acc = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double thr = i / 100.0;
    const double acc = binary_accuracy(sims, labels, thr);
    if (acc > best_acc) {
      best_acc = acc;
      best_thr = thr;
    }
  }
  return best_thr;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("pearson_r: length mismatch");
  if (x.size() < 2) throw PreconditionError("pearson_r: need at least two points");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("spearman_rho: length mismatch");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson_r(rx, ry);
}

StsScore sts_score(std::span<const double> sims, std::span<const double> gold,
                   const std::vector<std::string>& subcorpus) {
  if (sims.size() != gold.size() || sims.size() != subcorpus.size()) {
    throw PreconditionError("sts_score: length mismatch");
  }
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    auto& g = groups[subcorpus[i]];
    g.first.push_back(sims[i]);
    g.second.push_back(gold[i]);
  }
  StsScore out;
  double sum = 0;
  for (const auto& [name, g] : groups) {
    try {
      const double r = pearson_r(g.first, g.second);
      out.per_subcorpus[name] = r;
      sum += r;
    } catch (const std::exception& e) {
      log::warn("sts: sub-corpus '", name, "' excluded (", e.what(), ")");
      out.excluded.push_back(name);
    }
  }
  if (out.per_subcorpus.empty()) throw UndefinedStatistic("sts: no sub-corpus could be scored");
  out.corpus = sum / double(out.per_subcorpus.size());
  return out;
}

}  // namespace wic::evalkit
