#include "wic/distiller/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"

namespace wic::distiller {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'W', 'I', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

template <class Model, class F>
void visit_model(Model& m, F&& f) {
  m.meaning.visit([&](std::string_view n, auto& t) { f("meaning." + std::string(n), t); });
  m.context.visit([&](std::string_view n, auto& t) { f("context." + std::string(n), t); });
  f(std::string("layer_pos"), m.layer_pos);
}

}  // namespace

std::string encode_checkpoint(const DistillerModel<float>& model, const CheckpointMeta& meta) {
  const DistillerConfig& c = model.config;
  ordered_json header;
  header["format"] = "wic-distiller";
  header["config"] = {{"dim", c.dim},          {"num_rows", c.num_rows}, {"heads", c.heads},
                      {"ffn_mult", c.ffn_mult}, {"dropout", c.dropout},   {"ln_eps", c.ln_eps},
                      {"seed", c.seed}};
  header["meta"] = {{"mode", meta.mode},
                    {"use_negatives", meta.use_negatives},
                    {"epoch", meta.epoch},
                    {"step", meta.step},
                    {"best_val_loss", meta.best_val_loss},
                    {"provider_fingerprint", meta.provider_fingerprint}};
  std::string payload;
  ordered_json tensors = ordered_json::array();
  visit_model(model, [&](const std::string& name, const nn::Tensor2D<float>& t) {
    tensors.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"offset", payload.size()}});
    io::append_f32_le(payload, t.flat());
  });
  header["tensors"] = tensors;
  const std::string htext = header.dump();

  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  io::append_u32_le(out, static_cast<std::uint32_t>(htext.size()));
  out += htext;
  out += payload;
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 9 || bytes.compare(0, 4, std::string(kMagic, 4)) != 0) {
    throw FormatError("checkpoint: bad magic at byte offset 0");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) throw FormatError("checkpoint: unsupported version at byte offset 4");
  const std::uint32_t hlen = io::read_u32_le(std::string_view(bytes).substr(5, 4));
  if (bytes.size() < 9 + static_cast<std::size_t>(hlen)) throw FormatError("checkpoint: truncated header at byte offset 9");
  ordered_json header;
  try {
    header = ordered_json::parse(bytes.substr(9, hlen));
  } catch (const std::exception& e) {
    throw FormatError(std::string("checkpoint: unparseable header (") + e.what() + ")");
  }
  const std::size_t payload_start = 9 + hlen;
  const std::string_view payload = std::string_view(bytes).substr(payload_start);

  Checkpoint ck;
  try {
    const auto& c = header.at("config");
    DistillerConfig cfg;
    cfg.dim = c.at("dim").get<std::size_t>();
    cfg.num_rows = c.at("num_rows").get<std::size_t>();
    cfg.heads = c.at("heads").get<std::size_t>();
    cfg.ffn_mult = c.at("ffn_mult").get<std::size_t>();
    cfg.dropout = c.at("dropout").get<double>();
    cfg.ln_eps = c.at("ln_eps").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    const auto& m = header.at("meta");
    ck.meta.mode = m.at("mode").get<std::string>();
    ck.meta.use_negatives = m.at("use_negatives").get<bool>();
    ck.meta.epoch = m.at("epoch").get<std::uint64_t>();
    ck.meta.step = m.at("step").get<std::uint64_t>();
    ck.meta.best_val_loss = m.at("best_val_loss").get<double>();
    ck.meta.provider_fingerprint = m.at("provider_fingerprint").get<std::uint64_t>();
    ck.model = DistillerModel<float>::init(cfg);

    std::size_t idx = 0;
    const auto& tensors = header.at("tensors");
    visit_model(ck.model, [&](const std::string& name, nn::Tensor2D<float>& t) {
      if (idx >= tensors.size()) throw FormatError("checkpoint: missing tensor '" + name + "'");
      const auto& e = tensors[idx++];
      if (e.at("name").get<std::string>() != name) {
        throw FormatError("checkpoint: expected tensor '" + name + "', found '" + e.at("name").get<std::string>() + "'");
      }
      if (e.at("rows").get<std::size_t>() != t.rows() || e.at("cols").get<std::size_t>() != t.cols()) {
        throw FormatError("checkpoint: tensor '" + name + "' shape disagrees with config");
      }
      const std::size_t off = e.at("offset").get<std::size_t>();
      if (off > payload.size() || payload.size() - off < t.size() * 4) {
        throw FormatError("checkpoint: tensor '" + name + "' truncated at byte offset " +
                          std::to_string(payload_start + off));
      }
      io::read_f32_le(payload.substr(off, t.size() * 4), t.flat());
    });
    if (idx != tensors.size()) throw FormatError("checkpoint: unexpected extra tensors");
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header (") + e.what() + ")");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const DistillerModel<float>& model,
                     const CheckpointMeta& meta) {
  io::write_file_atomic(path, encode_checkpoint(model, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace wic::distiller
