#include "wic/provider/toy_mlm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string_view>

#include "wic/nncore/ops.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"
#include "wic/util/rng.hpp"

namespace wic::provider {

namespace {

const std::vector<std::string>& special_markers() {
  static const std::vector<std::string> markers{kClsToken, kSepToken, kMaskToken, kPadToken, kUnkToken};
  return markers;
}

std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace

void ToyMLMConfig::validate() const {
  if (num_layers == 0 || dim == 0 || heads == 0 || subword_chunk == 0 || max_positions < 3) {
    throw ConfigError("toy MLM: sizes must be positive");
  }
  if (dim % heads != 0) throw ConfigError("toy MLM: dim not divisible by heads");
  for (const auto& m : special_markers()) {
    if (std::count(vocab.begin(), vocab.end(), m) != 1) {
      throw ConfigError("toy MLM: vocabulary must contain marker " + m + " exactly once");
    }
  }
  std::set<std::string> seen(vocab.begin(), vocab.end());
  if (seen.size() != vocab.size()) throw ConfigError("toy MLM: duplicate vocabulary entries");
}

std::vector<std::string> chunk_word(const std::string& word, std::size_t chunk) {
  std::vector<std::string> pieces;
  std::size_t i = 0;
  while (i < word.size()) {
    std::size_t j = i;
    std::size_t cps = 0;
    while (j < word.size() && cps < chunk) {
      j += utf8_len(static_cast<unsigned char>(word[j]));
      ++cps;
    }
    j = std::min(j, word.size());
    pieces.push_back((pieces.empty() ? "" : "##") + word.substr(i, j - i));
    i = j;
  }
  if (pieces.empty()) pieces.push_back(word);
  return pieces;
}

std::vector<std::string> build_vocabulary(const std::vector<std::vector<std::string>>& sentences,
                                          std::size_t subword_chunk) {
  std::set<std::string> pieces;
  for (const auto& s : sentences) {
    for (const auto& w : s) {
      for (auto& p : chunk_word(w, subword_chunk)) pieces.insert(std::move(p));
    }
  }
  std::vector<std::string> vocab = special_markers();
  for (const auto& p : pieces) {
    if (std::find(vocab.begin(), vocab.end(), p) == vocab.end()) vocab.push_back(p);
  }
  return vocab;
}

ToyMLM::ToyMLM(ToyMLMConfig config) : config_(std::move(config)) {
  config_.validate();
  enc_cfg_.dim = config_.dim;
  enc_cfg_.heads = config_.heads;
  enc_cfg_.ffn_mult = config_.ffn_mult;
  enc_cfg_.dropout = 0.0;
  enc_cfg_.ln_eps = 1e-5;
  for (std::size_t i = 0; i < config_.vocab.size(); ++i) index_.emplace(config_.vocab[i], i);

  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Rng emb_rng = split_rng(config_.seed, "toy.token_embedding");
  token_emb_ = nn::Tensor2D<float>(config_.vocab.size(), config_.dim);
  for (float& v : token_emb_.flat()) v = static_cast<float>(unif(emb_rng));
  Rng pos_rng = split_rng(config_.seed, "toy.position_embedding");
  pos_emb_ = nn::Tensor2D<float>(config_.max_positions, config_.dim);
  for (float& v : pos_emb_.flat()) v = static_cast<float>(0.5 * unif(pos_rng));
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    Rng layer_rng = split_rng(config_.seed, "toy.layer." + std::to_string(l));
    layers_.push_back(nn::EncoderWeights<float>::init(enc_cfg_, layer_rng));
  }
}

std::size_t ToyMLM::token_id(const std::string& token) const {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  return index_.at(kUnkToken);
}

ToyMLM::Tokenized ToyMLM::tokenize(const std::vector<std::string>& words,
                                   std::optional<std::size_t> mask_word) const {
  Tokenized tok;
  tok.pieces.push_back(kClsToken);
  tok.special.push_back(1);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::size_t start = tok.pieces.size();
    if (mask_word && *mask_word == w) {
      tok.pieces.push_back(kMaskToken);
      tok.special.push_back(0);
    } else {
      for (auto& p : chunk_word(words[w], config_.subword_chunk)) {
        tok.pieces.push_back(std::move(p));
        tok.special.push_back(0);
      }
    }
    tok.word_spans.push_back({start, tok.pieces.size()});
  }
  tok.pieces.push_back(kSepToken);
  tok.special.push_back(1);
  return tok;
}

HiddenStack ToyMLM::run(const Tokenized& tok) const {
  const std::size_t n = tok.pieces.size();
  if (n > config_.max_positions) {
    throw PreconditionError("toy MLM: sentence of " + std::to_string(n) + " subwords exceeds max_positions " +
                            std::to_string(config_.max_positions));
  }
  const std::size_t d = config_.dim;
  const std::size_t layers = config_.num_layers + 1;
  HiddenStack out;
  out.subword_tokens = tok.pieces;
  out.special_mask = tok.special;
  out.layers = layers;
  out.dim = d;
  out.values.assign(n * layers * d, 0.0f);

  nn::Tensor2D<float> x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto e = token_emb_.row(token_id(tok.pieces[i]));
    auto p = pos_emb_.row(i);
    for (std::size_t j = 0; j < d; ++j) x(i, j) = e[j] + p[j];
  }
  auto store = [&](const nn::Tensor2D<float>& h, std::size_t layer) {
    for (std::size_t i = 0; i < n; ++i) std::copy(h.row(i).begin(), h.row(i).end(), out.at(i, layer).begin());
  };
  store(x, 0);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    x = nn::transformer_encoder_layer(x, layers_[l], enc_cfg_, false, nullptr);
    store(x, l + 1);
  }
  return out;
}

HiddenStack ToyMLM::encode_words(const std::vector<std::string>& words, std::optional<Span> target,
                                 std::string sentence_id) const {
  if (words.empty()) throw PreconditionError("toy MLM: empty sentence");
  Tokenized tok = tokenize(words, std::nullopt);
  HiddenStack stack = run(tok);
  stack.sentence_id = std::move(sentence_id);
  if (target) {
    if (target->start >= target->end || target->end > words.size()) {
      throw PreconditionError("toy MLM: target word span out of range");
    }
    stack.target_span = Span{tok.word_spans[target->start].start, tok.word_spans[target->end - 1].end};
  }
  return stack;
}

HiddenStack ToyMLM::encode(std::string_view key, const std::vector<std::string>& words,
                           std::optional<Span> target) const {
  return encode_words(words, target, std::string(key));
}

MaskedPredictionSet ToyMLM::predict_masked(const std::vector<std::string>& words, std::size_t word_index) const {
  if (word_index >= words.size()) throw PreconditionError("toy MLM: mask position out of range");
  Tokenized tok = tokenize(words, word_index);
  HiddenStack stack = run(tok);
  const std::size_t pos = tok.word_spans[word_index].start;
  auto h = stack.at(pos, config_.num_layers);

  const std::size_t v = config_.vocab.size();
  nn::Tensor2D<double> logits(1, v);
  for (std::size_t t = 0; t < v; ++t) {
    auto e = token_emb_.row(t);
    double acc = 0.0;
    for (std::size_t j = 0; j < config_.dim; ++j) acc += static_cast<double>(h[j]) * e[j];
    logits(0, t) = acc;
  }
  nn::Tensor2D<double> probs = nn::softmax_rows(logits);

  std::vector<std::size_t> order(v);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs(0, a) > probs(0, b); });

  MaskedPredictionSet out;
  out.position = pos;
  out.vocab_size = v;
  out.tokens.reserve(v);
  out.probs.reserve(v);
  for (std::size_t idx : order) {
    out.tokens.push_back(config_.vocab[idx]);
    out.probs.push_back(probs(0, idx));
  }
  return out;
}

std::uint64_t ToyMLM::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const nn::Tensor2D<float>& t) {
    h = io::hash_bytes(std::string_view(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float)), h);
  };
  mix(token_emb_);
  mix(pos_emb_);
  for (const auto& layer : layers_) layer.visit([&](std::string_view, const nn::Tensor2D<float>& t) { mix(t); });
  for (const auto& tok : config_.vocab) h = io::hash_bytes(tok, h);
  return h;
}

HiddenStack toy_mlm_encode(const std::vector<std::string>& sentence, const ToyMLMConfig& config) {
  return ToyMLM(config).encode_words(sentence);
}

MaskedPredictionSet toy_mlm_predict_masked(const std::vector<std::string>& sentence, std::size_t mask_position,
                                           const ToyMLMConfig& config) {
  return ToyMLM(config).predict_masked(sentence, mask_position);
}

}  // namespace wic::provider
