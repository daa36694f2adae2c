#pragma once

// Checkpoint layout:
//   "WICK" + version byte (1) + u32 LE header length + JSON header
//   + float32 LE payload.
// The header holds the distiller config, training metadata and a tensor
// index {name, rows, cols, offset}; offsets are relative to the payload.

#include <cstdint>
#include <filesystem>
#include <string>

#include "wic/distiller/model.hpp"

namespace wic::distiller {

struct CheckpointMeta {
  std::string mode = "monolingual";
  bool use_negatives = true;
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;
  double best_val_loss = 0.0;
  std::uint64_t provider_fingerprint = 0;
  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  DistillerModel<float> model;
  CheckpointMeta meta;
};

std::string encode_checkpoint(const DistillerModel<float>& model, const CheckpointMeta& meta);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const DistillerModel<float>& model,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wic::distiller
