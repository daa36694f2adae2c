#include "wic/provider/hsx1.hpp"

#include <nlohmann/json.hpp>

#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"

namespace wic::provider {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string header() {
  std::string h(kHsx1Magic, 4);
  h.push_back(static_cast<char>(kHsx1Version));
  return h;
}

}  // namespace

Hsx1Encoded encode_hsx1(std::span<const HiddenStack> stacks) {
  Hsx1Encoded enc;
  enc.bin = header();
  for (const auto& s : stacks) {
    s.validate();
    ordered_json rec;
    rec["id"] = s.sentence_id;
    rec["tokens"] = s.subword_tokens;
    std::vector<int> mask(s.special_mask.begin(), s.special_mask.end());
    rec["special_mask"] = mask;
    if (s.target_span) {
      rec["target_start"] = s.target_span->start;
      rec["target_end"] = s.target_span->end;
    } else {
      rec["target_start"] = nullptr;
      rec["target_end"] = nullptr;
    }
    rec["offset_bytes"] = enc.bin.size();
    rec["n_subwords"] = s.num_subwords();
    rec["n_layers"] = s.layers;
    rec["dim"] = s.dim;
    enc.meta += rec.dump();
    enc.meta.push_back('\n');
    io::append_f32_le(enc.bin, s.values);
  }
  return enc;
}

void write_hidden_states(const std::filesystem::path& meta_path, const std::filesystem::path& bin_path,
                         std::span<const HiddenStack> stacks) {
  Hsx1Encoded enc = encode_hsx1(stacks);
  io::write_file_atomic(bin_path, enc.bin);
  io::write_file_atomic(meta_path, enc.meta);
}

Hsx1Reader::Hsx1Reader(const std::filesystem::path& meta_path, const std::filesystem::path& bin_path)
    : meta_(meta_path) {
  if (!meta_) throw FormatError("HSX1: cannot open meta file " + meta_path.string());
  bin_ = io::read_file(bin_path);
  if (bin_.size() < 5 || bin_.compare(0, 4, std::string(kHsx1Magic, 4)) != 0) {
    throw FormatError("HSX1: bad magic at byte offset 0 of " + bin_path.string());
  }
  if (static_cast<std::uint8_t>(bin_[4]) != kHsx1Version) {
    throw FormatError("HSX1: unsupported version " + std::to_string(static_cast<int>(bin_[4])) +
                      " at byte offset 4");
  }
}

std::optional<HiddenStack> Hsx1Reader::next() {
  std::string line;
  while (std::getline(meta_, line)) {
    ++line_no_;
    if (line.empty() || line == "\r") continue;
    const std::string where = "HSX1 meta line " + std::to_string(line_no_) + ": ";
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw FormatError(where + "unparseable record (" + e.what() + ")");
    }
    HiddenStack s;
    std::size_t offset = 0;
    try {
      s.sentence_id = rec.at("id").get<std::string>();
      s.subword_tokens = rec.at("tokens").get<std::vector<std::string>>();
      for (int m : rec.at("special_mask").get<std::vector<int>>()) s.special_mask.push_back(m ? 1 : 0);
      s.layers = rec.at("n_layers").get<std::size_t>();
      s.dim = rec.at("dim").get<std::size_t>();
      offset = rec.at("offset_bytes").get<std::size_t>();
      const auto n = rec.at("n_subwords").get<std::size_t>();
      if (n != s.subword_tokens.size()) {
        throw FormatError(where + "n_subwords " + std::to_string(n) + " != token count " +
                          std::to_string(s.subword_tokens.size()));
      }
      const auto& ts = rec.at("target_start");
      const auto& te = rec.at("target_end");
      if (!ts.is_null() || !te.is_null()) s.target_span = Span{ts.get<std::size_t>(), te.get<std::size_t>()};
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(where + "missing or mistyped field (" + e.what() + ")");
    }
    const std::size_t count = s.subword_tokens.size() * s.layers * s.dim;
    const std::size_t bytes = count * 4;
    if (offset < 5 || offset > bin_.size() || bin_.size() - offset < bytes) {
      throw FormatError(where + "payload truncated: record needs " + std::to_string(bytes) +
                        " bytes at byte offset " + std::to_string(offset) + ", bin file has " +
                        std::to_string(bin_.size()) + " bytes");
    }
    s.values.resize(count);
    io::read_f32_le(std::string_view(bin_).substr(offset, bytes), s.values);
    try {
      s.validate();
    } catch (const FormatError& e) {
      throw FormatError(where + e.what() + " (byte offset " + std::to_string(offset) + ")");
    }
    return s;
  }
  return std::nullopt;
}

std::vector<HiddenStack> load_hidden_states(const std::filesystem::path& meta_path,
                                            const std::filesystem::path& bin_path) {
  Hsx1Reader reader(meta_path, bin_path);
  std::vector<HiddenStack> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

FileProvider::FileProvider(const std::filesystem::path& meta_path, const std::filesystem::path& bin_path)
    : FileProvider(load_hidden_states(meta_path, bin_path)) {}

FileProvider::FileProvider(std::vector<HiddenStack> stacks) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  bool first = true;
  for (auto& s : stacks) {
    if (first) {
      if (s.layers < 2) throw FormatError("HSX1 provider: need at least one transformer layer");
      num_hidden_layers_ = s.layers - 1;
      dim_ = s.dim;
      first = false;
    } else if (s.layers != num_hidden_layers_ + 1 || s.dim != dim_) {
      throw FormatError("HSX1 provider: record '" + s.sentence_id + "' has a different shape from the first record");
    }
    h = io::hash_bytes(s.sentence_id, h);
    h = io::hash_bytes(std::string_view(reinterpret_cast<const char*>(s.values.data()), s.values.size() * 4), h);
    std::string key = s.sentence_id;
    if (!stacks_.emplace(key, std::move(s)).second) throw FormatError("HSX1 provider: duplicate id '" + key + "'");
  }
  fingerprint_ = h;
}

HiddenStack FileProvider::encode(std::string_view key, const std::vector<std::string>& words,
                                 std::optional<Span> target) const {
  auto it = stacks_.find(std::string(key));
  if (it == stacks_.end()) throw PreconditionError("HSX1 provider: no record for sentence '" + std::string(key) + "'");
  if (target && !it->second.target_span) {
    throw PreconditionError("HSX1 provider: record '" + std::string(key) + "' carries no target span");
  }
  return it->second;
}

}  // namespace wic::provider
