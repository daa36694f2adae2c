#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "wic/nncore/tensor.hpp"

namespace wic::nn {

template <class T>
struct ParamRef {
  std::string name;
  Tensor2D<T>* value;
  Tensor2D<T>* grad;
};

// Non-owning registry of a model's trainable tensors and their gradient
// accumulators. Built on demand from the owning model; invalidated when the
// model moves.
template <class T>
class ParamStore {
 public:
  void add(std::string name, Tensor2D<T>& value, Tensor2D<T>& grad) {
    if (!value.same_shape(grad)) {
      throw DimensionError("ParamStore: gradient slot for '" + name + "' has shape " + grad.shape_str() +
                           ", parameter has " + value.shape_str());
    }
    if (!names_.insert(name).second) throw ConfigError("ParamStore: duplicate parameter name '" + name + "'");
    refs_.push_back({std::move(name), &value, &grad});
  }

  std::size_t size() const { return refs_.size(); }
  ParamRef<T>& operator[](std::size_t i) { return refs_[i]; }
  const ParamRef<T>& operator[](std::size_t i) const { return refs_[i]; }
  auto begin() { return refs_.begin(); }
  auto end() { return refs_.end(); }
  auto begin() const { return refs_.begin(); }
  auto end() const { return refs_.end(); }

  void zero_grad() {
    for (auto& r : refs_) r.grad->fill(T(0));
  }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const auto& r : refs_) n += r.value->size();
    return n;
  }

 private:
  std::vector<ParamRef<T>> refs_;
  std::unordered_set<std::string> names_;
};

}  // namespace wic::nn
