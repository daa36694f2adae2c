#include "wic/corpus/build.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "wic/util/errors.hpp"
#include "wic/util/log.hpp"
#include "wic/util/rng.hpp"
#include "wic/util/text.hpp"

namespace wic::corpus {

nlohmann::ordered_json CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  j["lines_read"] = lines_read;
  j["unreadable"] = unreadable;
  j["candidates"] = candidates;
  j["discarded"] = {{"no_alignment", no_alignment}, {"no_negative", no_negative}, {"cap", cap}};
  j["enhanced_positives"] = enhanced;
  j["emitted"] = emitted;
  j["train"] = train;
  j["validation"] = validation;
  return j;
}

std::vector<std::size_t> eligible_targets(const std::vector<std::string>& tokens, const EmbeddingTable& z) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!text::is_punct_or_numeral(tokens[i]) && z.contains(tokens[i])) out.push_back(i);
  }
  return out;
}

Attempt build_triple(const PairRecord& pair, std::size_t t, const provider::MaskedPredictor& predictor,
                     const EmbeddingTable& z, const FilterConfig& cfg) {
  Attempt out;
  const auto align = mutual_argmax_align(pair.src_tokens, t, pair.tgt_tokens, z);
  const auto p = cfg.mode == Mode::monolingual ? align_target_mono(align, cfg) : align_target_xl(align, cfg);
  if (!p) {
    out.reason = Discard::no_alignment;
    return out;
  }
  const std::string& w_t = pair.src_tokens[t];

  TrainingTriple tri;
  tri.mode = cfg.mode;
  tri.original = {pair.src_tokens, t, pair.lang_src};
  tri.positive = {pair.tgt_tokens, *p, pair.lang_tgt};

  std::optional<std::string> w_n;
  if (cfg.mode == Mode::monolingual) {
    if (enhancement_gate(w_t, tri.positive.tokens[*p], cfg)) {
      const auto preds = predictor.predict_masked(tri.positive.tokens, *p);
      if (auto repl = enhance_positive_mono(preds, w_t, tri.positive.tokens[*p], z, cfg)) {
        tri.positive.tokens[*p] = *repl;
        out.enhanced = true;
      }
    }
    w_n = select_negative_mono(predictor.predict_masked(pair.src_tokens, t), w_t, z, cfg);
    if (w_n) {
      tri.negative = tri.original;
      tri.negative.tokens[t] = *w_n;
    }
  } else {
    tri.language_pair = pair.lang_src + "-" + pair.lang_tgt;
    const auto preds = predictor.predict_masked(pair.tgt_tokens, *p);
    w_n = select_negative_xl(preds, w_t, pair.tgt_tokens[*p], z, cfg);
    if (w_n) {
      tri.negative = tri.positive;
      tri.negative.tokens[*p] = *w_n;
    }
  }
  if (!w_n) {
    out.reason = Discard::no_negative;
    return out;
  }
  out.triple = std::move(tri);
  return out;
}

std::size_t validation_count(std::size_t n, double fraction) {
  if (n < 2 || fraction <= 0.0) return 0;
  auto k = static_cast<std::size_t>(std::llround(fraction * double(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

namespace {

struct LineResult {
  bool unreadable = false;
  std::vector<Attempt> attempts;
};

LineResult process_line(const std::string& line, const provider::MaskedPredictor& predictor,
                        const EmbeddingTable& z, const FilterConfig& cfg) {
  LineResult r;
  PairRecord pair;
  try {
    pair = parse_pair(line);
  } catch (const FormatError& e) {
    r.unreadable = true;
    return r;
  }
  const auto targets = pair.target_index ? std::vector<std::size_t>{*pair.target_index}
                                         : eligible_targets(pair.src_tokens, z);
  for (std::size_t t : targets) r.attempts.push_back(build_triple(pair, t, predictor, z, cfg));
  return r;
}

}  // namespace

CorpusResult build_corpus(std::istream& in, const provider::MaskedPredictor& predictor, const EmbeddingTable& z,
                          const FilterConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }

  std::vector<LineResult> results(lines.size());
  threads = std::max<std::size_t>(1, std::min(threads, lines.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < lines.size(); ++i) results[i] = process_line(lines[i], predictor, z, cfg);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < lines.size(); i += threads) results[i] = process_line(lines[i], predictor, z, cfg);
      });
    }
    for (auto& th : pool) th.join();
  }

  CorpusResult out;
  auto& st = out.stats;
  st.lines_read = lines.size();
  std::vector<TrainingTriple> kept;
  std::unordered_map<std::string, std::size_t> per_target;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].unreadable) {
      ++st.unreadable;
      log::warn("pairs line ", i + 1, ": unreadable, skipped");
      continue;
    }
    for (auto& a : results[i].attempts) {
      ++st.candidates;
      if (a.reason == Discard::no_alignment) ++st.no_alignment;
      if (a.reason == Discard::no_negative) ++st.no_negative;
      if (!a.triple) continue;
      if (cfg.per_target_cap > 0) {
        const auto& orig = a.triple->original;
        auto& n = per_target[text::lower(orig.tokens[orig.target_index])];
        if (n >= cfg.per_target_cap) {
          ++st.cap;
          continue;
        }
        ++n;
      }
      if (a.enhanced) ++st.enhanced;
      kept.push_back(std::move(*a.triple));
    }
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%06zu", i);
    kept[i].id = buf;
  }
  st.emitted = kept.size();

  const std::size_t n_val = validation_count(kept.size(), cfg.validation_fraction);
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = split_rng(cfg.seed, "corpus.split");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint8_t> is_val(kept.size(), 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = 1;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    (is_val[i] ? out.validation : out.train).push_back(std::move(kept[i]));
  }
  st.train = out.train.size();
  st.validation = out.validation.size();
  return out;
}

}  // namespace wic::corpus
