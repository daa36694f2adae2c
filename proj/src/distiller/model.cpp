#include "wic/distiller/model.hpp"

#include <random>
#include <string>

#include "wic/nncore/ops.hpp"
#include "wic/provider/hidden_stack.hpp"

namespace wic::distiller {

DistillerConfig DistillerConfig::for_mode(Mode mode, std::size_t dim, std::size_t num_hidden_layers) {
  DistillerConfig cfg;
  cfg.dim = dim;
  cfg.num_rows = num_hidden_layers - provider::top_half_start(num_hidden_layers) + 1;
  cfg.ffn_mult = mode == Mode::monolingual ? 4 : 6;
  return cfg;
}

nn::EncoderConfig DistillerConfig::encoder() const {
  nn::EncoderConfig e;
  e.dim = dim;
  e.heads = heads;
  e.ffn_mult = ffn_mult;
  e.dropout = dropout;
  e.ln_eps = ln_eps;
  return e;
}

void DistillerConfig::validate() const {
  if (num_rows == 0) throw ConfigError("distiller: need at least one input layer");
  encoder().validate();
}

template <class T>
DistillerModel<T> DistillerModel<T>::init(const DistillerConfig& config) {
  config.validate();
  DistillerModel m;
  m.config = config;
  const nn::EncoderConfig enc = config.encoder();
  Rng meaning_rng = split_rng(config.seed, "distiller.meaning");
  Rng context_rng = split_rng(config.seed, "distiller.context");
  Rng pos_rng = split_rng(config.seed, "distiller.layer_pos");
  m.meaning = nn::EncoderWeights<T>::init(enc, meaning_rng);
  m.context = nn::EncoderWeights<T>::init(enc, context_rng);
  m.layer_pos = nn::Tensor2D<T>(config.num_rows, config.dim);
  std::uniform_real_distribution<double> unif(-0.1, 0.1);
  for (T& v : m.layer_pos.flat()) v = static_cast<T>(unif(pos_rng));
  m.meaning_grad = nn::EncoderWeights<T>::zeros_like(m.meaning);
  m.context_grad = nn::EncoderWeights<T>::zeros_like(m.context);
  m.layer_pos_grad = nn::Tensor2D<T>(config.num_rows, config.dim);
  return m;
}

template <class T>
DistilledPair<T> DistillerModel<T>::distil(const nn::Tensor2D<T>& top_layers, bool training, Rng* rng,
                                           DistilCache<T>* cache) const {
  if (top_layers.rows() != layer_pos.rows() || top_layers.cols() != config.dim) {
    throw ConfigError("distil: input " + top_layers.shape_str() + " does not match layer-position table " +
                      layer_pos.shape_str());
  }
  const nn::EncoderConfig enc = config.encoder();
  nn::Tensor2D<T> x = nn::add(top_layers, layer_pos);
  nn::Tensor2D<T> ym =
      nn::transformer_encoder_layer(x, meaning, enc, training, rng, cache ? &cache->meaning : nullptr);
  nn::Tensor2D<T> yc =
      nn::transformer_encoder_layer(x, context, enc, training, rng, cache ? &cache->context : nullptr);
  if (cache) cache->rows = x.rows();
  return {nn::mean_pool(ym), nn::mean_pool(yc)};
}

template <class T>
void DistillerModel<T>::backward(const DistilCache<T>& cache, std::span<const T> d_meaning,
                                 std::span<const T> d_context) {
  const nn::EncoderConfig enc = config.encoder();
  nn::Tensor2D<T> dym = nn::mean_pool_backward(cache.rows, d_meaning);
  nn::Tensor2D<T> dx = nn::transformer_encoder_layer_backward(cache.meaning, meaning, enc, dym, meaning_grad);
  nn::Tensor2D<T> dyc = nn::mean_pool_backward(cache.rows, d_context);
  nn::add_inplace(dx, nn::transformer_encoder_layer_backward(cache.context, context, enc, dyc, context_grad));
  nn::add_inplace(layer_pos_grad, dx);
}

template <class T>
nn::ParamStore<T> DistillerModel<T>::params() {
  nn::ParamStore<T> store;
  std::vector<std::pair<std::string, nn::Tensor2D<T>*>> values;
  meaning.visit([&](std::string_view n, nn::Tensor2D<T>& t) { values.emplace_back("meaning." + std::string(n), &t); });
  context.visit([&](std::string_view n, nn::Tensor2D<T>& t) { values.emplace_back("context." + std::string(n), &t); });
  std::vector<nn::Tensor2D<T>*> grads;
  meaning_grad.visit([&](std::string_view, nn::Tensor2D<T>& t) { grads.push_back(&t); });
  context_grad.visit([&](std::string_view, nn::Tensor2D<T>& t) { grads.push_back(&t); });
  for (std::size_t i = 0; i < values.size(); ++i) store.add(values[i].first, *values[i].second, *grads[i]);
  store.add("layer_pos", layer_pos, layer_pos_grad);
  return store;
}

template <class T>
void DistillerModel<T>::zero_grad() {
  meaning_grad.visit([](std::string_view, nn::Tensor2D<T>& t) { t.fill(T(0)); });
  context_grad.visit([](std::string_view, nn::Tensor2D<T>& t) { t.fill(T(0)); });
  layer_pos_grad.fill(T(0));
}

template <class T>
std::vector<T> reconstruction_target(const nn::Tensor2D<T>& top_layers) {
  return nn::mean_pool(top_layers);
}

template <class T>
std::vector<T> reconstruct(std::span<const T> meaning, std::span<const T> context) {
  if (meaning.size() != context.size()) throw DimensionError("reconstruct: meaning/context length mismatch");
  std::vector<T> out(meaning.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (meaning[i] + context[i]) / T(2);
  return out;
}

template <class T>
std::vector<T> reconstruct(const DistilledPair<T>& pair) {
  return reconstruct<T>(std::span<const T>(pair.meaning), std::span<const T>(pair.context));
}

template class DistillerModel<float>;
template class DistillerModel<double>;
template std::vector<float> reconstruction_target(const nn::Tensor2D<float>&);
template std::vector<double> reconstruction_target(const nn::Tensor2D<double>&);
template std::vector<float> reconstruct(const DistilledPair<float>&);
template std::vector<double> reconstruct(const DistilledPair<double>&);
template std::vector<float> reconstruct(std::span<const float>, std::span<const float>);
template std::vector<double> reconstruct(std::span<const double>, std::span<const double>);

}  // namespace wic::distiller
