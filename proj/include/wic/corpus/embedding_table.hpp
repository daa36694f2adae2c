#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wic::corpus {

// Static word vectors. Lookup tries the exact token first, then its
// lowercase form; an absent token has no vector (never a zero vector).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  // Returns false (and keeps the existing vector) when the token is already present.
  bool add(std::string token, std::vector<float> vec);

  const std::vector<float>* find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token) != nullptr; }

  std::size_t malformed_lines = 0;
  std::size_t duplicate_tokens = 0;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<float>> entries_;
  std::unordered_map<std::string, std::string> lowered_;  // lowercase form → first token seen
};

// Text vectors: optional "<count> <dim>" header, then "<token> <v1> ... <vd>".
// Unparseable lines are skipped and counted; a well-formed line whose width
// disagrees with the table throws FormatError.
EmbeddingTable parse_embedding_table(std::istream& in);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

// u·v / (‖u‖‖v‖), 0 when either norm is 0.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace wic::corpus
