#include "wic/corpus/records.hpp"

#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"
#include "wic/util/log.hpp"

namespace wic::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> tokens_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(std::string("missing token list '") + key + "'");
  auto out = j.at(key).get<std::vector<std::string>>();
  if (out.empty()) throw FormatError(std::string("empty token list '") + key + "'");
  return out;
}

ordered_json sentence_json(const SentenceRecord& s) {
  ordered_json j;
  j["tokens"] = s.tokens;
  j["target_index"] = s.target_index;
  j["lang"] = s.lang;
  return j;
}

SentenceRecord sentence_from_json(const json& j) {
  SentenceRecord s;
  s.tokens = tokens_field(j, "tokens");
  s.target_index = j.at("target_index").get<std::size_t>();
  if (s.target_index >= s.tokens.size()) throw FormatError("target_index out of range");
  s.lang = j.value("lang", std::string{});
  return s;
}

}  // namespace

PairRecord parse_pair(std::string_view line) {
  try {
    const json j = json::parse(line);
    PairRecord p;
    p.src_tokens = tokens_field(j, "src_tokens");
    p.tgt_tokens = tokens_field(j, "tgt_tokens");
    p.lang_src = j.value("lang_src", std::string{});
    p.lang_tgt = j.value("lang_tgt", std::string{});
    if (j.contains("target_index") && !j.at("target_index").is_null()) {
      p.target_index = j.at("target_index").get<std::size_t>();
      if (*p.target_index >= p.src_tokens.size()) throw FormatError("target_index out of range");
    }
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("pair record: ") + e.what());
  }
}

ordered_json to_json(const TrainingTriple& t) {
  ordered_json j;
  j["id"] = t.id;
  j["mode"] = std::string(to_string(t.mode));
  j["language_pair"] = t.language_pair ? ordered_json(*t.language_pair) : ordered_json(nullptr);
  j["original"] = sentence_json(t.original);
  j["positive"] = sentence_json(t.positive);
  j["negative"] = sentence_json(t.negative);
  return j;
}

TrainingTriple triple_from_json(const json& j) {
  try {
    TrainingTriple t;
    t.id = j.at("id").get<std::string>();
    t.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("language_pair") && !j.at("language_pair").is_null()) {
      t.language_pair = j.at("language_pair").get<std::string>();
    }
    t.original = sentence_from_json(j.at("original"));
    t.positive = sentence_from_json(j.at("positive"));
    t.negative = sentence_from_json(j.at("negative"));
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("triple record: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("triple record: ") + e.what());
  }
}

std::string triples_to_jsonl(const std::vector<TrainingTriple>& triples) {
  std::string out;
  for (const auto& t : triples) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

TripleFile read_triples(const std::filesystem::path& path) {
  TripleFile f;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f.triples.push_back(triple_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      ++f.skipped;
      log::warn(path.string(), ":", line_no, ": skipped (", e.what(), ")");
    }
  }
  return f;
}

}  // namespace wic::corpus
