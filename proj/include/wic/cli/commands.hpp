#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wic/corpus/filter_config.hpp"
#include "wic/evalkit/representation.hpp"
#include "wic/provider/toy_mlm.hpp"
#include "wic/trainer/optim.hpp"

namespace wic::cli {

// Where hidden states come from. "toy" builds the toy MLM from a word list;
// "hsx1" serves pre-exported files (no masked prediction).
struct ProviderOptions {
  std::string kind = "toy";
  std::filesystem::path vocab;  // one word per line
  std::size_t layers = 4;
  std::size_t dim = 16;
  std::size_t heads = 2;
  std::size_t ffn_mult = 4;
  std::size_t subword_chunk = 6;
  std::uint64_t seed = 1;
  std::filesystem::path hsx1_meta, hsx1_bin;

  void validate() const;
};

provider::ToyMLMConfig toy_config(const ProviderOptions& o);
std::unique_ptr<provider::HiddenStateProvider> make_provider(const ProviderOptions& o);

struct BuildCorpusOptions {
  std::filesystem::path pairs, embeddings, out_dir;
  corpus::FilterConfig filter;
  ProviderOptions provider;
  std::size_t threads = 1;
};

struct TrainOptions {
  std::filesystem::path train, validation, out_dir;
  std::optional<std::filesystem::path> resume;
  trainer::TrainConfig train_cfg;
  ProviderOptions provider;
};

struct EvaluateOptions {
  std::vector<std::string> tasks;  // "type:test[:dev]"
  std::vector<evalkit::RepKind> kinds{evalkit::RepKind::baseline, evalkit::RepKind::meaning,
                                      evalkit::RepKind::context};
  std::optional<std::filesystem::path> checkpoint;
  std::filesystem::path out_dir;
  ProviderOptions provider;
};

struct AnalyzeOptions {
  std::filesystem::path pairs;    // labelled sentence pairs
  std::filesystem::path targets;  // target words for the layer matrix
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir;
  ProviderOptions provider;
};

struct ExportHiddenOptions {
  std::vector<std::filesystem::path> triples;
  std::vector<std::string> tasks;
  std::vector<std::filesystem::path> targets;
  std::filesystem::path out_meta, out_bin;
  ProviderOptions provider;
};

// Each command validates everything up front, then writes all of its outputs
// together at the end; a failure leaves no output behind.
void build_corpus(const BuildCorpusOptions& o);
void train(const TrainOptions& o);
void evaluate(const EvaluateOptions& o);
void analyze(const AnalyzeOptions& o);
void export_hidden(const ExportHiddenOptions& o);

}  // namespace wic::cli
