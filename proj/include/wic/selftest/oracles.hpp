#pragma once

// Brute-force reference implementations. They share no code with the
// library routines they check and favour the most literal reading of each
// rule over speed.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wic/corpus/embedding_table.hpp"
#include "wic/corpus/filter_config.hpp"
#include "wic/objective/losses.hpp"
#include "wic/provider/hidden_stack.hpp"

namespace wic::oracle {

using Matrix = std::vector<std::vector<double>>;

// ---- objective ----

// The four cross terms, one sum of squares each, in the listed order.
double cross_mono(const objective::TripleRepresentations<double>& r);
double cross_xl(const objective::TripleRepresentations<double>& r);
double total(const objective::TripleRepresentations<double>& r);

// ---- alignment ----

std::set<std::pair<std::size_t, std::size_t>> mutual_pairs(const Matrix& m, std::size_t target);
std::optional<std::size_t> align_mono(const Matrix& m, std::size_t target, double sigma_mult);
std::optional<std::size_t> align_xl(const Matrix& m, std::size_t target, double sigma_mult, double quantile);

// ---- filtering ----

std::size_t levenshtein(const std::string& a, const std::string& b);
double cos(const std::vector<float>& a, const std::vector<float>& b);

std::optional<std::string> negative_mono(const provider::MaskedPredictionSet& preds, const std::string& w_t,
                                         const corpus::EmbeddingTable& z, const corpus::FilterConfig& cfg);
std::optional<std::string> enhance_mono(const provider::MaskedPredictionSet& preds, const std::string& w_t,
                                        const std::string& w_p, const corpus::EmbeddingTable& z,
                                        const corpus::FilterConfig& cfg);
std::optional<std::string> negative_xl(const provider::MaskedPredictionSet& preds, const std::string& w_t,
                                       const std::string& w_p, const corpus::EmbeddingTable& z,
                                       const corpus::FilterConfig& cfg);

// ---- metrics ----

double grid_threshold(const std::vector<double>& sims, const std::vector<int>& labels);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// ---- numeric core ----

std::vector<std::vector<double>> matmul(const std::vector<std::vector<double>>& a,
                                        const std::vector<std::vector<double>>& b);

}  // namespace wic::oracle
