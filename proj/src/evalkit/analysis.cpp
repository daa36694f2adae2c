#include "wic/evalkit/analysis.hpp"

#include "wic/corpus/embedding_table.hpp"
#include "wic/provider/hidden_stack.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/text.hpp"

namespace wic::evalkit {

nlohmann::ordered_json BucketReport::to_json() const {
  static constexpr const char* kRows[2] = {"common", "different"};
  static constexpr const char* kCols[2] = {"paraphrase", "non_paraphrase"};
  nlohmann::ordered_json j;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& b = cells[r][c];
      j[kRows[r]][kCols[c]] = {{"mean", b.mean ? nlohmann::ordered_json(*b.mean) : nlohmann::ordered_json(nullptr)},
                               {"count", b.count}};
    }
  }
  return j;
}

BucketReport bucketed_similarity(const std::vector<BucketPair>& pairs) {
  std::array<std::array<double, 2>, 2> sums{};
  BucketReport rep;
  for (const auto& p : pairs) {
    if (p.a.words.size() != p.a.reps.size() || p.b.words.size() != p.b.reps.size()) {
      throw DimensionError("bucketed_similarity: words and representations differ in count");
    }
    const std::size_t col = p.paraphrase ? 0 : 1;
    std::vector<std::string> lb;
    for (const auto& w : p.b.words) lb.push_back(text::lower(w));
    for (std::size_t i = 0; i < p.a.words.size(); ++i) {
      const std::string la = text::lower(p.a.words[i]);
      bool paired = false;
      for (std::size_t j = 0; j < lb.size(); ++j) {
        const double c = corpus::cosine(p.a.reps[i], p.b.reps[j]);
        if (la == lb[j]) {
          if (!paired) {
            sums[0][col] += c;
            ++rep.cells[0][col].count;
            paired = true;
          }
        } else {
          sums[1][col] += c;
          ++rep.cells[1][col].count;
        }
      }
    }
  }
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      if (rep.cells[r][c].count) rep.cells[r][c].mean = sums[r][c] / double(rep.cells[r][c].count);
    }
  }
  return rep;
}

WordReps word_representations(const RepresentationSource& src, const SentenceRef& s) {
  const auto stack = src.encode(s);
  const auto spans = provider::word_spans(stack);
  if (spans.size() != s.words.size()) {
    throw FormatError("sentence '" + s.key + "': " + std::to_string(s.words.size()) + " words but " +
                      std::to_string(spans.size()) + " word pieces in the hidden states");
  }
  WordReps out;
  out.words = s.words;
  for (const auto& sp : spans) out.reps.push_back(src.span_rep(stack, sp));
  return out;
}

nn::Tensor2D<double> layerwise_similarity(const distiller::DistillerModel<float>& model,
                                          const std::vector<nn::Tensor2D<float>>& targets,
                                          std::size_t num_hidden_layers) {
  if (targets.empty()) throw PreconditionError("layerwise_similarity: no targets");
  const std::size_t cols = num_hidden_layers + 1;
  nn::Tensor2D<double> out(3, cols);
  for (const auto& h : targets) {
    if (h.rows() != cols) throw DimensionError("layerwise_similarity: target has " + h.shape_str());
    const auto top = provider::select_top_layers(h, num_hidden_layers);
    const auto y = distiller::reconstruction_target(top);
    const auto pair = model.distil(top, false, nullptr);
    for (std::size_t i = 0; i < cols; ++i) {
      auto hi = h.row(i);
      out(0, i) += corpus::cosine(std::span<const float>(y), hi);
      out(1, i) += corpus::cosine(std::span<const float>(pair.meaning), hi);
      out(2, i) += corpus::cosine(std::span<const float>(pair.context), hi);
    }
  }
  for (double& v : out.flat()) v /= double(targets.size());
  return out;
}

}  // namespace wic::evalkit
