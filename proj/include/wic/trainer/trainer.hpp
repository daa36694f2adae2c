#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wic/corpus/records.hpp"
#include "wic/distiller/model.hpp"
#include "wic/objective/losses.hpp"
#include "wic/provider/provider.hpp"
#include "wic/trainer/optim.hpp"

namespace wic::trainer {

// Frozen inputs of one sentence: the selected layers of its target word and
// their mean (the reconstruction target).
struct EncodedSample {
  nn::Tensor2D<float> top;
  std::vector<float> target;
};

struct EncodedTriple {
  std::array<EncodedSample, 3> samples;  // original, positive, negative
};

// Provider key of a triple member: "<id>:original" etc.
std::string sample_key(const std::string& triple_id, std::size_t which);

EncodedSample encode_sample(const provider::HiddenStateProvider& provider, const std::string& key,
                            const corpus::SentenceRecord& s);

// Runs the provider over every triple (negatives skipped when unused) on up
// to `threads` workers; output order equals input order.
std::vector<EncodedTriple> encode_triples(const provider::HiddenStateProvider& provider,
                                          const std::vector<corpus::TrainingTriple>& triples, bool use_negatives,
                                          std::size_t threads);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  distiller::DistillerModel<float> best_model;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
  bool stopped_early = false;
  std::vector<EpochRecord> history;
};

class Trainer {
 public:
  Trainer(distiller::DistillerModel<float> model, TrainConfig cfg, std::size_t start_step = 0);

  // Mean total loss over one batch in training mode; applies one AdamW step.
  double train_step(const std::vector<const EncodedTriple*>& batch);

  // Mean total loss with dropout off; no parameter or gradient change.
  double evaluate(const std::vector<EncodedTriple>& data) const;

  // Loss of one triple for a given model in eval mode.
  static double triple_loss(const distiller::DistillerModel<float>& model, const EncodedTriple& t, Mode mode,
                            bool use_negatives);

  // Epoch loop with early stopping; the best-validation model is returned.
  // `on_epoch` (optional) sees every record as it is produced.
  TrainResult fit(const std::vector<EncodedTriple>& train, const std::vector<EncodedTriple>& validation,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

  const distiller::DistillerModel<float>& model() const { return model_; }
  distiller::DistillerModel<float>& model() { return model_; }
  std::size_t step() const { return step_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  distiller::DistillerModel<float> model_;
  TrainConfig cfg_;
  AdamW opt_;
  std::size_t step_ = 0;
  Rng dropout_rng_;
  Rng shuffle_rng_;
};

}  // namespace wic::trainer
