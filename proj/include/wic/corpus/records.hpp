#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wic/mode.hpp"

namespace wic::corpus {

struct SentenceRecord {
  std::vector<std::string> tokens;
  std::size_t target_index = 0;
  std::string lang;
  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

struct TrainingTriple {
  std::string id;
  Mode mode = Mode::monolingual;
  std::optional<std::string> language_pair;
  SentenceRecord original;
  SentenceRecord positive;
  SentenceRecord negative;
  friend bool operator==(const TrainingTriple&, const TrainingTriple&) = default;
};

// One input line: {src_tokens[], tgt_tokens[], lang_src, lang_tgt, target_index?}.
// Without target_index every eligible source word is tried as a target.
struct PairRecord {
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  std::string lang_src;
  std::string lang_tgt;
  std::optional<std::size_t> target_index;
};

// All parsers throw FormatError on missing fields or out-of-range targets.
PairRecord parse_pair(std::string_view line);

nlohmann::ordered_json to_json(const TrainingTriple& t);
TrainingTriple triple_from_json(const nlohmann::json& j);
std::string triples_to_jsonl(const std::vector<TrainingTriple>& triples);

struct TripleFile {
  std::vector<TrainingTriple> triples;
  std::size_t skipped = 0;  // unparseable lines
};
// Corrupt lines are skipped and counted, never fatal.
TripleFile read_triples(const std::filesystem::path& path);

}  // namespace wic::corpus
