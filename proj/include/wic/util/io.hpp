#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wic::io {

// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Little-endian float32 encoding independent of host byte order.
void append_f32_le(std::string& out, std::span<const float> values);
void read_f32_le(std::string_view bytes, std::span<float> out);

void append_u32_le(std::string& out, std::uint32_t v);
std::uint32_t read_u32_le(std::string_view bytes);

std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace wic::io
