#include "wic/trainer/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wic/util/errors.hpp"

namespace wic::trainer {

TrainConfig TrainConfig::for_mode(Mode mode) {
  TrainConfig c;
  c.mode = mode;
  c.batch_size = mode == Mode::monolingual ? 128 : 512;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (!(base_lr > 0)) throw ConfigError("train: base_lr must be positive");
  if (warmup_steps == 0) throw ConfigError("train: warmup_steps must be positive");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) throw ConfigError("train: betas must lie in (0, 1)");
  if (!(eps > 0)) throw ConfigError("train: eps must be positive");
  if (!(weight_decay >= 0)) throw ConfigError("train: weight_decay must be non-negative");
  if (patience == 0) throw ConfigError("train: patience must be positive");
  if (!(min_delta > 0)) throw ConfigError("train: min_delta must be positive");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be positive");
}

double lr_schedule(std::size_t step, const TrainConfig& cfg) {
  if (step == 0) throw PreconditionError("lr_schedule: steps count from 1");
  return cfg.base_lr * std::min(1.0, double(step) / double(cfg.warmup_steps));
}

void AdamW::step(nn::ParamStore<float>& params, double lr) {
  for (const auto& p : params) {
    for (float g : p.grad->flat()) {
      if (!std::isfinite(g)) throw NumericError("adamw: non-finite gradient in '" + p.name + "'");
    }
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value->size(), 0.0);
      v_.emplace_back(p.value->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ConfigError("adamw: parameter set changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  const double decay = 1.0 - lr * weight_decay_;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto w = params[k].value->flat();
    auto g = params[k].grad->flat();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] = static_cast<float>(double(w[i]) * decay - lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

bool EarlyStopper::update(double val_loss) {
  if (val_loss <= best_ - min_delta_ || !std::isfinite(best_)) {
    if (std::isfinite(val_loss)) {
      best_ = val_loss;
      bad_epochs_ = 0;
      return true;
    }
  }
  ++bad_epochs_;
  return false;
}

}  // namespace wic::trainer
