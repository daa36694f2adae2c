#pragma once

// HSX1 hidden-state exchange format.
//
//   bin  : "HSX1" + version byte (1), then float32 little-endian tensors,
//          one (n_subwords × n_layers × dim) block per sentence.
//   meta : one JSON object per line:
//          {id, tokens[], special_mask[], target_start, target_end,
//           offset_bytes, n_subwords, n_layers, dim}
//          offset_bytes is relative to the start of the bin file; the target
//          fields are null when the record carries no target.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wic/provider/provider.hpp"

namespace wic::provider {

inline constexpr char kHsx1Magic[4] = {'H', 'S', 'X', '1'};
inline constexpr std::uint8_t kHsx1Version = 1;

struct Hsx1Encoded {
  std::string meta;
  std::string bin;
};

Hsx1Encoded encode_hsx1(std::span<const HiddenStack> stacks);

void write_hidden_states(const std::filesystem::path& meta_path, const std::filesystem::path& bin_path,
                         std::span<const HiddenStack> stacks);

// Streams records in file order. Every record is checked against the
// payload before it is returned; a bad record throws FormatError and is
// never yielded.
class Hsx1Reader {
 public:
  Hsx1Reader(const std::filesystem::path& meta_path, const std::filesystem::path& bin_path);

  std::optional<HiddenStack> next();

 private:
  std::ifstream meta_;
  std::string bin_;
  std::size_t line_no_ = 0;
};

std::vector<HiddenStack> load_hidden_states(const std::filesystem::path& meta_path,
                                            const std::filesystem::path& bin_path);

// Serves pre-exported hidden states by sentence key.
class FileProvider final : public HiddenStateProvider {
 public:
  FileProvider(const std::filesystem::path& meta_path, const std::filesystem::path& bin_path);
  explicit FileProvider(std::vector<HiddenStack> stacks);

  HiddenStack encode(std::string_view key, const std::vector<std::string>& words,
                     std::optional<Span> target) const override;
  std::size_t num_hidden_layers() const override { return num_hidden_layers_; }
  std::size_t dim() const override { return dim_; }
  std::uint64_t fingerprint() const override { return fingerprint_; }
  std::size_t size() const { return stacks_.size(); }

 private:
  std::unordered_map<std::string, HiddenStack> stacks_;
  std::size_t num_hidden_layers_ = 0;
  std::size_t dim_ = 0;
  std::uint64_t fingerprint_ = 0;
};

}  // namespace wic::provider
