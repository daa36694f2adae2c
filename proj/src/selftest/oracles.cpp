#include "wic/selftest/oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace wic::oracle {

namespace {

double sq_dist_half(const std::vector<double>& target, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double r = 0.5 * (a[i] + b[i]);
    s += (target[i] - r) * (target[i] - r);
  }
  return s;
}

bool finite(double v) { return v > -std::numeric_limits<double>::infinity() && v < std::numeric_limits<double>::infinity(); }

std::string lowered(const std::string& s) {
  std::string o = s;
  for (auto& c : o) c = char(std::tolower((unsigned char)c));
  return o;
}

bool punct_or_number(const std::string& s) {
  bool any_alpha = false, all_digitish = true;
  for (unsigned char c : s) {
    if (std::isalpha(c) || c >= 0x80) any_alpha = true;
    if (!(std::isdigit(c) || c == '.' || c == ',' || c == '-' || c == '+')) all_digitish = false;
  }
  bool any_digit = std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  if (!any_alpha && !any_digit) return true;
  return all_digitish && any_digit;
}

}  // namespace

double cross_mono(const objective::TripleRepresentations<double>& r) {
  const double d = double(r.original.target.size());
  const auto& h = r.original.distilled;
  const auto& p = r.positive.distilled;
  const auto& n = r.negative.distilled;
  double s = sq_dist_half(r.positive.target, h.meaning, p.context);
  s += sq_dist_half(r.original.target, p.meaning, h.context);
  s += sq_dist_half(r.negative.target, n.meaning, h.context);
  s += sq_dist_half(r.original.target, h.meaning, n.context);
  return s / d;
}

double cross_xl(const objective::TripleRepresentations<double>& r) {
  const double d = double(r.original.target.size());
  const auto& h = r.original.distilled;
  const auto& p = r.positive.distilled;
  const auto& n = r.negative.distilled;
  double s = sq_dist_half(r.positive.target, h.meaning, p.context);
  s += sq_dist_half(r.original.target, p.meaning, h.context);
  s += sq_dist_half(r.positive.target, h.meaning, n.context);
  s += sq_dist_half(r.negative.target, n.meaning, p.context);
  return s / d;
}

double total(const objective::TripleRepresentations<double>& r) {
  const double d = double(r.original.target.size());
  double rec = sq_dist_half(r.original.target, r.original.distilled.meaning, r.original.distilled.context) / d +
               sq_dist_half(r.positive.target, r.positive.distilled.meaning, r.positive.distilled.context) / d;
  if (!r.use_negatives) {
    const auto& h = r.original.distilled;
    const auto& p = r.positive.distilled;
    return rec + (sq_dist_half(r.positive.target, h.meaning, p.context) +
                  sq_dist_half(r.original.target, p.meaning, h.context)) / d;
  }
  rec += sq_dist_half(r.negative.target, r.negative.distilled.meaning, r.negative.distilled.context) / d;
  return rec + (r.mode == Mode::monolingual ? cross_mono(r) : cross_xl(r));
}

std::set<std::pair<std::size_t, std::size_t>> mutual_pairs(const Matrix& m, std::size_t target) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (i == target) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!finite(m[i][j])) continue;
      bool row_best = true;
      for (std::size_t k = 0; k < cols; ++k) {
        if (finite(m[i][k]) && (m[i][k] > m[i][j] || (m[i][k] == m[i][j] && k < j))) row_best = false;
      }
      bool col_best = true;
      for (std::size_t k = 0; k < rows; ++k) {
        if (finite(m[k][j]) && (m[k][j] > m[i][j] || (m[k][j] == m[i][j] && k < i))) col_best = false;
      }
      if (row_best && col_best) out.insert({i, j});
    }
  }
  return out;
}

namespace {

struct Stats {
  double mean = 0, sd = 0;
  std::size_t n = 0;
};

Stats matrix_stats(const Matrix& m) {
  Stats s;
  double sum = 0;
  for (const auto& row : m)
    for (double v : row)
      if (finite(v)) sum += v, ++s.n;
  if (!s.n) return s;
  s.mean = sum / double(s.n);
  double ss = 0;
  for (const auto& row : m)
    for (double v : row)
      if (finite(v)) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / double(s.n));
  return s;
}

// Best j (highest value, lowest index on ties) satisfying `ok`.
template <class F>
std::optional<std::size_t> best_where(const std::vector<double>& row, F ok) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!finite(row[j]) || !ok(j)) continue;
    if (!best || row[j] > row[*best]) best = j;
  }
  return best;
}

}  // namespace

std::optional<std::size_t> align_mono(const Matrix& m, std::size_t target, double sigma_mult) {
  const auto pairs = mutual_pairs(m, target);
  const Stats st = matrix_stats(m);
  if (!st.n) return std::nullopt;
  return best_where(m[target], [&](std::size_t j) {
    for (auto& pr : pairs)
      if (pr.second == j) return false;
    return m[target][j] > st.mean + sigma_mult * st.sd;
  });
}

std::optional<std::size_t> align_xl(const Matrix& m, std::size_t target, double sigma_mult, double quantile) {
  const auto pairs = mutual_pairs(m, target);
  const Stats st = matrix_stats(m);
  if (!st.n) return std::nullopt;
  double lo = -std::numeric_limits<double>::infinity();
  if (!pairs.empty()) {
    // Pairs visited by ascending i, the order the aligner sums them in.
    double sum = 0;
    for (auto& pr : pairs) sum += m[pr.first][pr.second];
    const double mu = sum / double(pairs.size());
    double ss = 0;
    for (auto& pr : pairs) ss += (m[pr.first][pr.second] - mu) * (m[pr.first][pr.second] - mu);
    lo = mu - quantile * std::sqrt(ss / double(pairs.size()));
  }
  return best_where(m[target], [&](std::size_t j) {
    for (auto& pr : pairs)
      if (pr.second == j) return false;
    return m[target][j] > st.mean + sigma_mult * st.sd && m[target][j] >= lo;
  });
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

double cos(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * double(b[i]);
    aa += double(a[i]) * double(a[i]);
    bb += double(b[i]) * double(b[i]);
  }
  if (aa == 0 || bb == 0) return 0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

namespace {

// Indices of the top-k predictions (probability order, stable) above delta.
std::vector<std::size_t> admissible(const provider::MaskedPredictionSet& preds, const corpus::FilterConfig& cfg) {
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < preds.tokens.size(); ++i) all.push_back(i);
  // insertion sort: stable, obviously correct
  for (std::size_t i = 1; i < all.size(); ++i)
    for (std::size_t j = i; j > 0 && preds.probs[all[j]] > preds.probs[all[j - 1]]; --j) std::swap(all[j], all[j - 1]);
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < all.size() && r < cfg.top_k; ++r)
    if (preds.probs[all[r]] > cfg.delta) out.push_back(all[r]);
  return out;
}

}  // namespace

std::optional<std::string> negative_mono(const provider::MaskedPredictionSet& preds, const std::string& w_t,
                                         const corpus::EmbeddingTable& z, const corpus::FilterConfig& cfg) {
  const auto* zt = z.find(w_t);
  if (!zt) return std::nullopt;
  for (std::size_t i : admissible(preds, cfg)) {
    const auto& tok = preds.tokens[i];
    if (lowered(tok) == lowered(w_t) || punct_or_number(tok)) continue;
    const auto* zc = z.find(tok);
    if (zc && cos(*zc, *zt) < cfg.lambda) return tok;
  }
  return std::nullopt;
}

std::optional<std::string> enhance_mono(const provider::MaskedPredictionSet& preds, const std::string& w_t,
                                        const std::string& w_p, const corpus::EmbeddingTable& z,
                                        const corpus::FilterConfig& cfg) {
  if (levenshtein(lowered(w_t), lowered(w_p)) > cfg.edit_gate) return std::nullopt;
  const auto* zt = z.find(w_t);
  if (!zt) return std::nullopt;
  for (std::size_t i : admissible(preds, cfg)) {
    const auto& tok = preds.tokens[i];
    if (lowered(tok) == lowered(w_t) || lowered(tok) == lowered(w_p)) continue;
    if (levenshtein(lowered(tok), lowered(w_t)) <= cfg.edit_gate) continue;
    const auto* zc = z.find(tok);
    if (zc && cos(*zc, *zt) >= cfg.lambda) return tok;
  }
  return std::nullopt;
}

std::optional<std::string> negative_xl(const provider::MaskedPredictionSet& preds, const std::string& w_t,
                                       const std::string& w_p, const corpus::EmbeddingTable& z,
                                       const corpus::FilterConfig& cfg) {
  const auto* zt = z.find(w_t);
  const auto* zp = z.find(w_p);
  if (!zt || !zp) return std::nullopt;
  std::vector<std::size_t> set;
  for (std::size_t i : admissible(preds, cfg))
    if (!punct_or_number(preds.tokens[i]) && z.find(preds.tokens[i])) set.push_back(i);
  if (set.empty()) return std::nullopt;
  double mean = 0;
  for (std::size_t i : set) mean += cos(*z.find(preds.tokens[i]), *zp);
  mean /= double(set.size());
  const double ref = cos(*zp, *zt);
  std::optional<std::size_t> best;
  for (std::size_t i : set) {
    const auto& zc = *z.find(preds.tokens[i]);
    if (cos(zc, *zp) < mean && cos(zc, *zt) < ref && (!best || preds.probs[i] > preds.probs[*best])) best = i;
  }
  if (!best) return std::nullopt;
  return preds.tokens[*best];
}

double grid_threshold(const std::vector<double>& sims, const std::vector<int>& labels) {
  std::vector<std::size_t> correct(101, 0);
  for (int g = 0; g <= 100; ++g)
    for (std::size_t i = 0; i < sims.size(); ++i) correct[g] += (sims[i] >= g / 100.0) == (labels[i] == 1);
  const std::size_t top = *std::max_element(correct.begin(), correct.end());
  for (int g = 0; g <= 100; ++g)
    if (correct[g] == top) return g / 100.0;
  return 0.0;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i], sy += y[i];
    sxx += x[i] * x[i], syy += y[i] * y[i], sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto rank = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0, equal = 0;
      for (double w : v) below += w < v[i], equal += w == v[i];
      r[i] = below + (equal + 1) / 2.0;
    }
    return r;
  };
  return pearson(rank(x), rank(y));
}

std::vector<std::vector<double>> matmul(const std::vector<std::vector<double>>& a,
                                        const std::vector<std::vector<double>>& b) {
  std::vector<std::vector<double>> c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

}  // namespace wic::oracle
