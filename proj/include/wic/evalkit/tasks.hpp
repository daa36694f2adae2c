#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wic/evalkit/analysis.hpp"
#include "wic/evalkit/representation.hpp"

namespace wic::evalkit {

// Tab-separated task files; token fields are space-separated words and
// spans are word indices [start, end).
//   word pair  : sent1  s1  e1  sent2  s2  e2  gold
//   cosimlex   : ctx1  a_s a_e b_s b_e  ctx2  a_s a_e b_s b_e  gold_change
//   sentence   : sent1  sent2  gold  [subcorpus]      (sts, paws, buckets)
//   targets    : sent  start  end                     (layer-wise analysis)
// Lines that are blank or start with '#' are ignored.

struct WordPairInstance {
  SentenceRef a, b;
  double gold = 0.0;
};

struct CoSimlexInstance {
  SentenceRef a1, b1, a2, b2;  // words a and b in context 1, then in context 2
  double gold_change = 0.0;
};

struct SentencePairInstance {
  SentenceRef a, b;
  double gold = 0.0;
  std::string subcorpus;
};

// Provider keys are "<name>:<line>:<slot>", line numbers 1-based.
std::vector<WordPairInstance> load_word_pairs(const std::filesystem::path& path, const std::string& name);
std::vector<CoSimlexInstance> load_cosimlex(const std::filesystem::path& path, const std::string& name);
std::vector<SentencePairInstance> load_sentence_pairs(const std::filesystem::path& path, const std::string& name);
std::vector<SentenceRef> load_targets(const std::filesystem::path& path, const std::string& name);

// Binary labels accept 1/0, T/F, true/false, P/N.
int parse_binary_label(std::string_view s);

struct TaskSpec {
  std::string type;
  std::filesystem::path test;
  std::optional<std::filesystem::path> dev;
  std::string name;  // key prefix; defaults to the test file's stem
};

const std::vector<std::string>& supported_task_types();

// "type:path[:dev_path]". Unknown types raise ConfigError listing the supported ones.
TaskSpec parse_task_spec(std::string_view spec);

// Every sentence the task will ask a provider for (used to export hidden states).
std::vector<SentenceRef> task_sentences(const TaskSpec& task);

// Full report for one (task, kind): metric, value, tuned threshold for
// binary tasks, per-instance similarities.
nlohmann::ordered_json run_task(const TaskSpec& task, const RepresentationSource& src);

}  // namespace wic::evalkit
