#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wic::evalkit {

// Grid {0.00, 0.01, …, 1.00}; "same meaning" iff sim ≥ threshold. Returns the
// grid point with the best accuracy, smallest threshold on ties.
double tune_threshold(std::span<const double> sims, std::span<const int> labels);

double binary_accuracy(std::span<const double> sims, std::span<const int> labels, double threshold);

// Both throw UndefinedStatistic when a variance is zero, PreconditionError
// on fewer than two points or mismatched lengths.
double pearson_r(std::span<const double> x, std::span<const double> y);
double spearman_rho(std::span<const double> x, std::span<const double> y);

// 1-based ranks, ties share the average rank.
std::vector<double> fractional_ranks(std::span<const double> x);

// Predicted change of similarity between two contexts.
inline double cosimlex_change(double sim_ctx1, double sim_ctx2) { return sim_ctx2 - sim_ctx1; }

struct StsScore {
  double corpus = 0.0;                  // unweighted mean over scored sub-corpora
  std::map<std::string, double> per_subcorpus;
  std::vector<std::string> excluded;    // too few pairs or constant gold
};

// Pearson r per sub-corpus between predicted and gold scores.
StsScore sts_score(std::span<const double> sims, std::span<const double> gold,
                   const std::vector<std::string>& subcorpus);

}  // namespace wic::evalkit
