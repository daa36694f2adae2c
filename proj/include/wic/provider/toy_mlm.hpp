#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "wic/nncore/encoder.hpp"
#include "wic/provider/provider.hpp"

namespace wic::provider {

inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";
inline constexpr const char* kMaskToken = "[MASK]";
inline constexpr const char* kPadToken = "[PAD]";
inline constexpr const char* kUnkToken = "[UNK]";

struct ToyMLMConfig {
  std::size_t num_layers = 4;  // ℓ
  std::size_t dim = 16;
  std::size_t heads = 2;
  std::size_t ffn_mult = 4;
  std::size_t subword_chunk = 6;
  std::size_t max_positions = 512;
  std::uint64_t seed = 1;
  std::vector<std::string> vocab;

  void validate() const;
};

// Special markers followed by the sorted, de-duplicated subword pieces of
// every word in `sentences`.
std::vector<std::string> build_vocabulary(const std::vector<std::vector<std::string>>& sentences,
                                          std::size_t subword_chunk);

// Splits a word into pieces of at most `chunk` code points; pieces after
// the first carry a "##" prefix.
std::vector<std::string> chunk_word(const std::string& word, std::size_t chunk);

// Deterministic, randomly initialised stand-in for a pre-trained masked LM.
// Parameters are fixed at construction and never exposed mutably.
class ToyMLM final : public HiddenStateProvider, public MaskedPredictor {
 public:
  explicit ToyMLM(ToyMLMConfig config);

  const ToyMLMConfig& config() const { return config_; }

  HiddenStack encode_words(const std::vector<std::string>& words, std::optional<Span> target = std::nullopt,
                           std::string sentence_id = {}) const;

  HiddenStack encode(std::string_view key, const std::vector<std::string>& words,
                     std::optional<Span> target) const override;
  MaskedPredictionSet predict_masked(const std::vector<std::string>& words, std::size_t word_index) const override;

  std::size_t num_hidden_layers() const override { return config_.num_layers; }
  std::size_t dim() const override { return config_.dim; }
  std::uint64_t fingerprint() const override;

  std::size_t token_id(const std::string& token) const;
  const nn::Tensor2D<float>& token_embeddings() const { return token_emb_; }

 private:
  struct Tokenized {
    std::vector<std::string> pieces;
    std::vector<std::uint8_t> special;
    std::vector<Span> word_spans;
  };
  Tokenized tokenize(const std::vector<std::string>& words, std::optional<std::size_t> mask_word) const;
  HiddenStack run(const Tokenized& tok) const;

  ToyMLMConfig config_;
  nn::EncoderConfig enc_cfg_;
  std::unordered_map<std::string, std::size_t> index_;
  nn::Tensor2D<float> token_emb_;
  nn::Tensor2D<float> pos_emb_;
  std::vector<nn::EncoderWeights<float>> layers_;
};

HiddenStack toy_mlm_encode(const std::vector<std::string>& sentence, const ToyMLMConfig& config);
MaskedPredictionSet toy_mlm_predict_masked(const std::vector<std::string>& sentence, std::size_t mask_position,
                                           const ToyMLMConfig& config);

}  // namespace wic::provider
