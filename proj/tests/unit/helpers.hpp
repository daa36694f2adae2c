#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "wic/nncore/tensor.hpp"
#include "wic/util/rng.hpp"

namespace testutil {

template <class T>
wic::nn::Tensor2D<T> random_tensor(wic::Rng& rng, std::size_t r, std::size_t c, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  wic::nn::Tensor2D<T> t(r, c);
  for (auto& v : t.flat()) v = T(u(rng));
  return t;
}

inline std::vector<double> random_doubles(wic::Rng& rng, std::size_t n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Fresh empty directory under the system temp dir, removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int n = 0;
    path = std::filesystem::temp_directory_path() / ("wic-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                                                     std::to_string(n++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& s) const { return path / s; }
};

}  // namespace testutil
