#include "wic/corpus/embedding_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include "wic/util/errors.hpp"
#include "wic/util/log.hpp"
#include "wic/util/text.hpp"

namespace wic::corpus {

bool EmbeddingTable::add(std::string token, std::vector<float> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw FormatError("embedding '" + token + "' has " + std::to_string(vec.size()) + " values, table dim is " +
                      std::to_string(dim_));
  }
  if (entries_.count(token)) {
    ++duplicate_tokens;
    return false;
  }
  lowered_.try_emplace(text::lower(token), token);
  entries_.emplace(std::move(token), std::move(vec));
  return true;
}

const std::vector<float>* EmbeddingTable::find(std::string_view token) const {
  if (auto it = entries_.find(std::string(token)); it != entries_.end()) return &it->second;
  const std::string low = text::lower(token);
  if (auto it = entries_.find(low); it != entries_.end()) return &it->second;
  if (auto it = lowered_.find(low); it != lowered_.end()) return &entries_.at(it->second);
  return nullptr;
}

namespace {

std::optional<float> parse_float(const std::string& s) {
  float v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_count(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

EmbeddingTable parse_embedding_table(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto parts = text::split_ws(line);
    if (parts.empty()) continue;
    if (line_no == 1 && parts.size() == 2) {
      auto count = parse_count(parts[0]);
      auto dim = parse_count(parts[1]);
      if (count && dim && *dim > 0) {
        table = EmbeddingTable(*dim);
        continue;
      }
    }
    if (parts.size() < 2) {
      ++table.malformed_lines;
      continue;
    }
    std::vector<float> vec;
    vec.reserve(parts.size() - 1);
    bool ok = true;
    for (std::size_t i = 1; i < parts.size() && ok; ++i) {
      auto v = parse_float(parts[i]);
      if (!v) ok = false;
      else vec.push_back(*v);
    }
    if (!ok) {
      ++table.malformed_lines;
      continue;
    }
    if (table.dim() != 0 && vec.size() != table.dim()) {
      throw FormatError("embedding line " + std::to_string(line_no) + ": " + std::to_string(vec.size()) +
                        " values, expected " + std::to_string(table.dim()));
    }
    table.add(std::move(parts[0]), std::move(vec));
  }
  if (table.malformed_lines) log::warn("embeddings: skipped ", table.malformed_lines, " malformed line(s)");
  if (table.duplicate_tokens) log::warn("embeddings: ", table.duplicate_tokens, " duplicate token(s); kept first");
  return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file " + path.string());
  return parse_embedding_table(in);
}

template <class T>
static double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw DimensionError("cosine: length mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += double(u[i]) * double(v[i]);
    nu += double(u[i]) * double(u[i]);
    nv += double(v[i]) * double(v[i]);
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

}  // namespace wic::corpus
