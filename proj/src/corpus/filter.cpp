#include "wic/corpus/filter.hpp"

#include <algorithm>
#include <numeric>

#include "wic/util/text.hpp"

namespace wic::corpus {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto x = text::codepoints(a);
  const auto y = text::codepoints(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

std::vector<Candidate> top_candidates(const MaskedPredictionSet& preds, const FilterConfig& cfg) {
  // Emitted sets are already sorted; a stable sort keeps that order and
  // tolerates hand-built ones.
  const std::size_t total = std::min(preds.tokens.size(), preds.probs.size());
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds.probs[a] > preds.probs[b]; });
  std::vector<Candidate> out;
  for (std::size_t r = 0; r < std::min(cfg.top_k, total); ++r) {
    const std::size_t i = order[r];
    if (preds.probs[i] > cfg.delta) out.push_back({preds.tokens[i], preds.probs[i]});
  }
  return out;
}

std::optional<std::string> select_negative_mono(const MaskedPredictionSet& preds, const std::string& w_t,
                                                const EmbeddingTable& z, const FilterConfig& cfg) {
  const auto* zt = z.find(w_t);
  if (!zt) return std::nullopt;
  for (const auto& c : top_candidates(preds, cfg)) {
    if (text::iequals(c.token, w_t) || text::is_punct_or_numeral(c.token)) continue;
    const auto* zc = z.find(c.token);
    if (!zc) continue;
    if (cosine(*zc, *zt) < cfg.lambda) return c.token;
  }
  return std::nullopt;
}

bool enhancement_gate(const std::string& w_t, const std::string& w_p, const FilterConfig& cfg) {
  return edit_distance(text::lower(w_t), text::lower(w_p)) <= cfg.edit_gate;
}

std::optional<std::string> enhance_positive_mono(const MaskedPredictionSet& preds, const std::string& w_t,
                                                 const std::string& w_p, const EmbeddingTable& z,
                                                 const FilterConfig& cfg) {
  if (!enhancement_gate(w_t, w_p, cfg)) return std::nullopt;
  const auto* zt = z.find(w_t);
  if (!zt) return std::nullopt;
  const std::string lt = text::lower(w_t);
  for (const auto& c : top_candidates(preds, cfg)) {
    if (text::iequals(c.token, w_t) || text::iequals(c.token, w_p)) continue;
    if (edit_distance(text::lower(c.token), lt) <= cfg.edit_gate) continue;
    const auto* zc = z.find(c.token);
    if (!zc) continue;
    if (cosine(*zc, *zt) >= cfg.lambda) return c.token;
  }
  return std::nullopt;
}

std::optional<std::string> select_negative_xl(const MaskedPredictionSet& preds, const std::string& w_t,
                                              const std::string& w_p, const EmbeddingTable& z,
                                              const FilterConfig& cfg) {
  const auto* zt = z.find(w_t);
  const auto* zp = z.find(w_p);
  if (!zt || !zp) return std::nullopt;

  struct Scored {
    const Candidate* cand;
    double to_p;
    double to_t;
  };
  const auto cands = top_candidates(preds, cfg);
  std::vector<Scored> pool;
  for (const auto& c : cands) {
    if (text::is_punct_or_numeral(c.token)) continue;
    const auto* zc = z.find(c.token);
    if (!zc) continue;
    pool.push_back({&c, cosine(*zc, *zp), cosine(*zc, *zt)});
  }
  if (pool.empty()) return std::nullopt;
  double mean = 0;
  for (const auto& s : pool) mean += s.to_p;
  mean /= double(pool.size());
  const double pt = cosine(*zp, *zt);
  for (const auto& s : pool) {
    if (s.to_p < mean && s.to_t < pt) return s.cand->token;
  }
  return std::nullopt;
}

}  // namespace wic::corpus
