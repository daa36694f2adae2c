#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "wic/mode.hpp"
#include "wic/nncore/param_store.hpp"

namespace wic::trainer {

struct TrainConfig {
  Mode mode = Mode::monolingual;
  bool use_negatives = true;
  std::size_t batch_size = 128;
  double base_lr = 1e-4;
  std::size_t warmup_steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t patience = 15;
  double min_delta = 1e-5;
  std::size_t max_epochs = 100;
  std::size_t max_steps = 0;  // 0 = no step limit
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // Batch size 128 monolingual, 512 crosslingual.
  static TrainConfig for_mode(Mode mode);
  void validate() const;
};

// base_lr · min(1, step / warmup_steps), step ≥ 1.
double lr_schedule(std::size_t step, const TrainConfig& cfg);

// Decoupled weight decay Adam. Moments are created lazily on the first step
// and matched to parameters by position in the store.
class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}
  explicit AdamW(const TrainConfig& cfg) : AdamW(cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay) {}

  // Every gradient is checked before anything is touched; a non-finite one
  // throws NumericError naming the parameter and leaves the store unchanged.
  void step(nn::ParamStore<float>& params, double lr);

  std::size_t steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Stops once `patience` consecutive epochs fail to improve the best
// validation loss by at least min_delta.
class EarlyStopper {
 public:
  EarlyStopper(std::size_t patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}

  // Returns true when `val_loss` is a new best.
  bool update(double val_loss);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  double best() const { return best_; }
  std::size_t bad_epochs() const { return bad_epochs_; }

 private:
  std::size_t patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
};

}  // namespace wic::trainer
