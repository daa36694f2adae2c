#include "wic/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "wic/util/errors.hpp"
#include "wic/util/log.hpp"

namespace wic::trainer {

using distiller::DistilCache;
using distiller::DistilledPair;
using distiller::DistillerModel;

namespace {
constexpr const char* kSampleNames[3] = {"original", "positive", "negative"};
}

std::string sample_key(const std::string& triple_id, std::size_t which) {
  return triple_id + ":" + kSampleNames[which];
}

EncodedSample encode_sample(const provider::HiddenStateProvider& provider, const std::string& key,
                            const corpus::SentenceRecord& s) {
  const auto stack = provider.encode(key, s.tokens, provider::Span{s.target_index, s.target_index + 1});
  EncodedSample out;
  out.top = provider::select_top_layers(provider::pool_target_subwords(stack), provider.num_hidden_layers());
  out.target = distiller::reconstruction_target(out.top);
  return out;
}

std::vector<EncodedTriple> encode_triples(const provider::HiddenStateProvider& provider,
                                          const std::vector<corpus::TrainingTriple>& triples, bool use_negatives,
                                          std::size_t threads) {
  std::vector<EncodedTriple> out(triples.size());
  auto work = [&](std::size_t i) {
    const auto& t = triples[i];
    out[i].samples[0] = encode_sample(provider, sample_key(t.id, 0), t.original);
    out[i].samples[1] = encode_sample(provider, sample_key(t.id, 1), t.positive);
    if (use_negatives) out[i].samples[2] = encode_sample(provider, sample_key(t.id, 2), t.negative);
  };
  threads = std::max<std::size_t>(1, std::min(threads, triples.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < triples.size(); ++i) work(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < triples.size(); i += threads) work(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

nlohmann::ordered_json EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["val_loss"] = val_loss;
  j["lr"] = lr;
  return j;
}

Trainer::Trainer(DistillerModel<float> model, TrainConfig cfg, std::size_t start_step)
    : model_(std::move(model)),
      cfg_(cfg),
      opt_(cfg),
      step_(start_step),
      dropout_rng_(split_rng(cfg.seed, "trainer.dropout")),
      shuffle_rng_(split_rng(cfg.seed, "trainer.shuffle")) {
  cfg_.validate();
}

namespace {

objective::TripleRepresentations<float> assemble(const EncodedTriple& t, std::array<DistilledPair<float>, 3>& d,
                                                 Mode mode, bool use_negatives) {
  objective::TripleRepresentations<float> reps;
  reps.mode = mode;
  reps.use_negatives = use_negatives;
  reps.original = {t.samples[0].target, std::move(d[0])};
  reps.positive = {t.samples[1].target, std::move(d[1])};
  if (use_negatives) reps.negative = {t.samples[2].target, std::move(d[2])};
  return reps;
}

}  // namespace

double Trainer::triple_loss(const DistillerModel<float>& model, const EncodedTriple& t, Mode mode,
                            bool use_negatives) {
  std::array<DistilledPair<float>, 3> d;
  const std::size_t n = use_negatives ? 3 : 2;
  for (std::size_t s = 0; s < n; ++s) d[s] = model.distil(t.samples[s].top, false, nullptr);
  const auto reps = assemble(t, d, mode, use_negatives);
  return double(objective::total_loss(reps).total());
}

double Trainer::train_step(const std::vector<const EncodedTriple*>& batch) {
  if (batch.empty()) throw PreconditionError("train_step: empty batch");
  model_.zero_grad();
  const std::size_t n = cfg_.use_negatives ? 3 : 2;
  const float scale = 1.0f / static_cast<float>(batch.size());
  double loss_sum = 0.0;
  for (const EncodedTriple* t : batch) {
    std::array<DistilCache<float>, 3> caches;
    std::array<DistilledPair<float>, 3> d;
    for (std::size_t s = 0; s < n; ++s) d[s] = model_.distil(t->samples[s].top, true, &dropout_rng_, &caches[s]);
    const auto reps = assemble(*t, d, cfg_.mode, cfg_.use_negatives);
    auto grads = objective::TripleGradients<float>::zeros(model_.config.dim);
    loss_sum += double(objective::total_loss(reps, &grads).total());
    std::array<DistilledPair<float>*, 3> g = {&grads.original, &grads.positive, &grads.negative};
    for (std::size_t s = 0; s < n; ++s) {
      for (float& v : g[s]->meaning) v *= scale;
      for (float& v : g[s]->context) v *= scale;
      model_.backward(caches[s], g[s]->meaning, g[s]->context);
    }
  }
  ++step_;
  auto params = model_.params();
  opt_.step(params, lr_schedule(step_, cfg_));
  return loss_sum / double(batch.size());
}

double Trainer::evaluate(const std::vector<EncodedTriple>& data) const {
  if (data.empty()) throw PreconditionError("evaluate: empty set");
  double sum = 0.0;
  for (const auto& t : data) sum += triple_loss(model_, t, cfg_.mode, cfg_.use_negatives);
  return sum / double(data.size());
}

TrainResult Trainer::fit(const std::vector<EncodedTriple>& train, const std::vector<EncodedTriple>& validation,
                         const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train.empty()) throw ConfigError("train: empty training corpus");
  const auto& val_set = validation.empty() ? train : validation;
  if (validation.empty()) log::warn("train: no validation triples; early stopping watches the training set");

  TrainResult res;
  res.best_model = model_;
  EarlyStopper stopper(cfg_.patience, cfg_.min_delta);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng_);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    bool hit_step_limit = false;
    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      std::vector<const EncodedTriple*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + cfg_.batch_size); ++i) {
        batch.push_back(&train[order[i]]);
      }
      const double loss = train_step(batch);
      if (!std::isfinite(loss)) throw NumericError("train: non-finite loss at step " + std::to_string(step_));
      loss_sum += loss;
      ++batches;
      if (cfg_.max_steps && step_ >= cfg_.max_steps) {
        hit_step_limit = true;
        break;
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(batches);
    rec.val_loss = evaluate(val_set);
    rec.lr = lr_schedule(std::max<std::size_t>(step_, 1), cfg_);
    res.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    log::info("epoch ", epoch, " step ", step_, " train ", rec.train_loss, " val ", rec.val_loss);

    if (stopper.update(rec.val_loss)) {
      res.best_model = model_;
      res.best_val_loss = rec.val_loss;
      res.best_epoch = epoch;
    }
    if (stopper.should_stop()) {
      res.stopped_early = true;
      break;
    }
    if (hit_step_limit) break;
  }
  res.steps = step_;
  return res;
}

}  // namespace wic::trainer
