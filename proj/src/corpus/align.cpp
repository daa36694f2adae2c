#include "wic/corpus/align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wic/util/errors.hpp"

namespace wic::corpus {

FilterConfig FilterConfig::for_mode(Mode mode) {
  FilterConfig c;
  c.mode = mode;
  if (mode == Mode::crosslingual) {
    c.top_k = 30;
    c.delta = 0.001;
    c.sigma_mult = 1.282;
    c.per_target_cap = 100;
  }
  return c;
}

void FilterConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("filter: delta must lie in (0, 1)");
  if (top_k < 1) throw ConfigError("filter: top_k must be >= 1");
  if (!(lambda >= -1.0 && lambda <= 1.0)) throw ConfigError("filter: lambda must lie in [-1, 1]");
  if (!(sigma_mult >= 0.0) || !(aligned_quantile >= 0.0)) throw ConfigError("filter: negative sigma multiplier");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("filter: validation_fraction must lie in [0, 1)");
  }
}

SimilarityMatrix similarity_matrix(const std::vector<std::string>& s, const std::vector<std::string>& s_p,
                                   const EmbeddingTable& z) {
  std::vector<const std::vector<float>*> col(s_p.size());
  for (std::size_t j = 0; j < s_p.size(); ++j) col[j] = z.find(s_p[j]);
  SimilarityMatrix m(s.size(), std::vector<double>(s_p.size(), kNoEmbedding));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto* u = z.find(s[i]);
    if (!u) continue;
    for (std::size_t j = 0; j < s_p.size(); ++j) {
      if (col[j]) m[i][j] = cosine(*u, *col[j]);
    }
  }
  return m;
}

bool Alignment::in_aligned(std::size_t j) const { return std::binary_search(aligned.begin(), aligned.end(), j); }

std::optional<std::size_t> row_argmax(const SimilarityMatrix& m, std::size_t i) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < m[i].size(); ++j) {
    if (!std::isfinite(m[i][j])) continue;
    if (!best || m[i][j] > m[i][*best]) best = j;
  }
  return best;
}

std::optional<std::size_t> col_argmax(const SimilarityMatrix& m, std::size_t j) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m[i][j])) continue;
    if (!best || m[i][j] > m[*best][j]) best = i;
  }
  return best;
}

Alignment mutual_argmax_align(SimilarityMatrix m, std::size_t target) {
  if (target >= m.size()) throw PreconditionError("mutual_argmax_align: target index out of range");
  Alignment a;
  a.target = target;
  a.m = std::move(m);
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    if (i == target) continue;
    auto j = row_argmax(a.m, i);
    if (!j) continue;
    auto back = col_argmax(a.m, *j);
    if (back && *back == i) {
      a.pairs.emplace_back(i, *j);
      a.aligned.push_back(*j);
    }
  }
  std::sort(a.aligned.begin(), a.aligned.end());
  a.aligned.erase(std::unique(a.aligned.begin(), a.aligned.end()), a.aligned.end());
  return a;
}

Alignment mutual_argmax_align(const std::vector<std::string>& s, std::size_t target,
                              const std::vector<std::string>& s_p, const EmbeddingTable& z) {
  if (s.empty() || s_p.empty()) throw PreconditionError("mutual_argmax_align: empty sentence");
  return mutual_argmax_align(similarity_matrix(s, s_p, z), target);
}

MatrixStats finite_stats(const SimilarityMatrix& m) {
  MatrixStats st;
  double sum = 0;
  for (const auto& row : m) {
    for (double v : row) {
      if (std::isfinite(v)) {
        sum += v;
        ++st.count;
      }
    }
  }
  if (st.count == 0) return st;
  st.mean = sum / double(st.count);
  double ss = 0;
  for (const auto& row : m) {
    for (double v : row) {
      if (std::isfinite(v)) ss += (v - st.mean) * (v - st.mean);
    }
  }
  st.stddev = std::sqrt(ss / double(st.count));
  return st;
}

namespace {

// Candidates j ∉ A with a finite M[t][j], by descending similarity, ties by index.
std::vector<std::size_t> ranked_candidates(const Alignment& a) {
  const auto& row = a.m[a.target];
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (std::isfinite(row[j]) && !a.in_aligned(j)) idx.push_back(j);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return row[x] > row[y]; });
  return idx;
}

}  // namespace

std::optional<std::size_t> align_target_mono(const Alignment& a, const FilterConfig& cfg) {
  const auto st = finite_stats(a.m);
  if (st.count == 0) return std::nullopt;
  const double bar = st.mean + cfg.sigma_mult * st.stddev;
  for (std::size_t j : ranked_candidates(a)) {
    if (a.m[a.target][j] > bar) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> align_target_xl(const Alignment& a, const FilterConfig& cfg) {
  const auto st = finite_stats(a.m);
  if (st.count == 0) return std::nullopt;
  const double bar = st.mean + cfg.sigma_mult * st.stddev;
  double floor = -std::numeric_limits<double>::infinity();
  if (!a.pairs.empty()) {
    double sum = 0;
    for (auto [i, j] : a.pairs) sum += a.m[i][j];
    const double mu = sum / double(a.pairs.size());
    double ss = 0;
    for (auto [i, j] : a.pairs) ss += (a.m[i][j] - mu) * (a.m[i][j] - mu);
    floor = mu - cfg.aligned_quantile * std::sqrt(ss / double(a.pairs.size()));
  }
  for (std::size_t j : ranked_candidates(a)) {
    const double v = a.m[a.target][j];
    if (v > bar && v >= floor) return j;
  }
  return std::nullopt;
}

}  // namespace wic::corpus
