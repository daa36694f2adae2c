#include "wic/evalkit/tasks.hpp"

#include <charconv>

#include "wic/evalkit/metrics.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"
#include "wic/util/text.hpp"

namespace wic::evalkit {

namespace {

struct Row {
  std::size_t line_no;
  std::vector<std::string> fields;
};

std::vector<Row> read_tsv(const std::filesystem::path& path) {
  std::vector<Row> rows;
  std::size_t n = 0;
  for (const auto& line : io::read_lines(path)) {
    ++n;
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    rows.push_back({n, text::split(line, '\t')});
  }
  return rows;
}

[[noreturn]] void bad(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::size_t to_index(const std::filesystem::path& path, std::size_t line, const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(path, line, "expected an index, got '" + s + "'");
  return v;
}

double to_real(const std::filesystem::path& path, std::size_t line, const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(path, line, "expected a number, got '" + s + "'");
  return v;
}

std::vector<std::string> words(const std::filesystem::path& path, std::size_t line, const std::string& s) {
  auto w = text::split_ws(s);
  if (w.empty()) bad(path, line, "empty sentence");
  return w;
}

provider::Span span(const std::filesystem::path& path, std::size_t line, const std::vector<std::string>& w,
                    const std::string& s, const std::string& e) {
  provider::Span sp{to_index(path, line, s), to_index(path, line, e)};
  if (sp.start >= sp.end || sp.end > w.size()) bad(path, line, "span [" + s + ", " + e + ") out of range");
  return sp;
}

std::string key(const std::string& name, std::size_t line, std::string_view slot) {
  return name + ":" + std::to_string(line) + ":" + std::string(slot);
}

}  // namespace

int parse_binary_label(std::string_view s) {
  const std::string l = text::lower(s);
  if (l == "1" || l == "t" || l == "true" || l == "p") return 1;
  if (l == "0" || l == "f" || l == "false" || l == "n") return 0;
  throw FormatError("not a binary label: '" + std::string(s) + "'");
}

std::vector<WordPairInstance> load_word_pairs(const std::filesystem::path& path, const std::string& name) {
  std::vector<WordPairInstance> out;
  for (const auto& r : read_tsv(path)) {
    const auto& f = r.fields;
    if (f.size() != 7) bad(path, r.line_no, "expected 7 fields, got " + std::to_string(f.size()));
    WordPairInstance in;
    in.a.key = key(name, r.line_no, "1");
    in.a.words = words(path, r.line_no, f[0]);
    in.a.target = span(path, r.line_no, in.a.words, f[1], f[2]);
    in.b.key = key(name, r.line_no, "2");
    in.b.words = words(path, r.line_no, f[3]);
    in.b.target = span(path, r.line_no, in.b.words, f[4], f[5]);
    try {
      in.gold = parse_binary_label(f[6]);
    } catch (const FormatError&) {
      in.gold = to_real(path, r.line_no, f[6]);
    }
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<CoSimlexInstance> load_cosimlex(const std::filesystem::path& path, const std::string& name) {
  std::vector<CoSimlexInstance> out;
  for (const auto& r : read_tsv(path)) {
    const auto& f = r.fields;
    if (f.size() != 11) bad(path, r.line_no, "expected 11 fields, got " + std::to_string(f.size()));
    CoSimlexInstance in;
    const auto c1 = words(path, r.line_no, f[0]);
    const auto c2 = words(path, r.line_no, f[5]);
    in.a1 = {key(name, r.line_no, "1a"), c1, span(path, r.line_no, c1, f[1], f[2])};
    in.b1 = {key(name, r.line_no, "1b"), c1, span(path, r.line_no, c1, f[3], f[4])};
    in.a2 = {key(name, r.line_no, "2a"), c2, span(path, r.line_no, c2, f[6], f[7])};
    in.b2 = {key(name, r.line_no, "2b"), c2, span(path, r.line_no, c2, f[8], f[9])};
    in.gold_change = to_real(path, r.line_no, f[10]);
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<SentencePairInstance> load_sentence_pairs(const std::filesystem::path& path, const std::string& name) {
  std::vector<SentencePairInstance> out;
  for (const auto& r : read_tsv(path)) {
    const auto& f = r.fields;
    if (f.size() != 3 && f.size() != 4) bad(path, r.line_no, "expected 3 or 4 fields, got " + std::to_string(f.size()));
    SentencePairInstance in;
    in.a = {key(name, r.line_no, "1"), words(path, r.line_no, f[0]), std::nullopt};
    in.b = {key(name, r.line_no, "2"), words(path, r.line_no, f[1]), std::nullopt};
    try {
      in.gold = parse_binary_label(f[2]);
    } catch (const FormatError&) {
      in.gold = to_real(path, r.line_no, f[2]);
    }
    in.subcorpus = f.size() == 4 ? f[3] : std::string("all");
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<SentenceRef> load_targets(const std::filesystem::path& path, const std::string& name) {
  std::vector<SentenceRef> out;
  for (const auto& r : read_tsv(path)) {
    const auto& f = r.fields;
    if (f.size() != 3) bad(path, r.line_no, "expected 3 fields, got " + std::to_string(f.size()));
    SentenceRef s;
    s.key = name + ":" + std::to_string(r.line_no);
    s.words = words(path, r.line_no, f[0]);
    s.target = span(path, r.line_no, s.words, f[1], f[2]);
    out.push_back(std::move(s));
  }
  return out;
}

const std::vector<std::string>& supported_task_types() {
  static const std::vector<std::string> types = {"wic",  "mcl-wic",     "usim",         "scws",
                                                 "cosimlex-i", "cosimlex-ii", "sts", "paws"};
  return types;
}

namespace {

enum class Shape { binary_word, graded_word, cosimlex, sts, binary_sentence };

Shape shape_of(const std::string& type) {
  if (type == "wic" || type == "mcl-wic") return Shape::binary_word;
  if (type == "usim" || type == "scws" || type == "cosimlex-ii") return Shape::graded_word;
  if (type == "cosimlex-i") return Shape::cosimlex;
  if (type == "sts") return Shape::sts;
  if (type == "paws") return Shape::binary_sentence;
  throw ConfigError("unknown task type '" + type + "'; supported: " + text::join(supported_task_types(), ", "));
}

std::string dev_name(const TaskSpec& t) { return t.name + ".dev"; }

}  // namespace

TaskSpec parse_task_spec(std::string_view spec) {
  const auto parts = text::split(spec, ':');
  if (parts.size() < 2 || parts.size() > 3 || parts[0].empty() || parts[1].empty()) {
    throw ConfigError("task spec '" + std::string(spec) + "' is not type:path[:dev_path]");
  }
  TaskSpec t;
  t.type = parts[0];
  shape_of(t.type);
  t.test = parts[1];
  if (parts.size() == 3 && !parts[2].empty()) t.dev = parts[2];
  t.name = t.test.stem().string();
  const Shape s = shape_of(t.type);
  if ((s == Shape::binary_word || s == Shape::binary_sentence) && !t.dev) {
    throw ConfigError("task '" + t.type + "' tunes a threshold and needs a dev file (type:test:dev)");
  }
  return t;
}

std::vector<SentenceRef> task_sentences(const TaskSpec& task) {
  std::vector<SentenceRef> out;
  auto add_pairs = [&](const std::filesystem::path& p, const std::string& name) {
    for (auto& in : load_word_pairs(p, name)) {
      out.push_back(std::move(in.a));
      out.push_back(std::move(in.b));
    }
  };
  auto add_sentences = [&](const std::filesystem::path& p, const std::string& name) {
    for (auto& in : load_sentence_pairs(p, name)) {
      out.push_back(std::move(in.a));
      out.push_back(std::move(in.b));
    }
  };
  switch (shape_of(task.type)) {
    case Shape::binary_word:
      add_pairs(*task.dev, dev_name(task));
      [[fallthrough]];
    case Shape::graded_word:
      add_pairs(task.test, task.name);
      break;
    case Shape::cosimlex:
      for (auto& in : load_cosimlex(task.test, task.name)) {
        for (auto* s : {&in.a1, &in.b1, &in.a2, &in.b2}) out.push_back(std::move(*s));
      }
      break;
    case Shape::binary_sentence:
      add_sentences(*task.dev, dev_name(task));
      [[fallthrough]];
    case Shape::sts:
      add_sentences(task.test, task.name);
      break;
  }
  return out;
}

namespace {

std::vector<double> word_pair_sims(const std::vector<WordPairInstance>& data, const RepresentationSource& src) {
  std::vector<double> sims;
  sims.reserve(data.size());
  for (const auto& in : data) sims.push_back(word_similarity(src, in.a, in.b));
  return sims;
}

std::vector<double> sentence_pair_sims(const std::vector<SentencePairInstance>& data,
                                       const RepresentationSource& src) {
  std::vector<double> sims;
  sims.reserve(data.size());
  for (const auto& in : data) {
    sims.push_back(similarity(src.sentence_rep(src.encode(in.a)), src.sentence_rep(src.encode(in.b))));
  }
  return sims;
}

template <class Inst>
std::vector<int> labels_of(const std::vector<Inst>& data) {
  std::vector<int> out;
  for (const auto& in : data) out.push_back(in.gold != 0.0 ? 1 : 0);
  return out;
}

template <class Inst>
std::vector<double> golds_of(const std::vector<Inst>& data) {
  std::vector<double> out;
  for (const auto& in : data) out.push_back(in.gold);
  return out;
}

void add_binary(nlohmann::ordered_json& rep, const std::vector<double>& dev_sims, const std::vector<int>& dev_labels,
                const std::vector<double>& sims, const std::vector<int>& labels) {
  const double thr = tune_threshold(dev_sims, dev_labels);
  rep["metric"] = "accuracy";
  rep["value"] = binary_accuracy(sims, labels, thr);
  rep["threshold"] = thr;
  rep["dev_accuracy"] = binary_accuracy(dev_sims, dev_labels, thr);
}

}  // namespace

nlohmann::ordered_json run_task(const TaskSpec& task, const RepresentationSource& src) {
  nlohmann::ordered_json rep;
  rep["task"] = task.name;
  rep["type"] = task.type;
  rep["kind"] = std::string(to_string(src.kind()));
  std::vector<double> sims;
  switch (shape_of(task.type)) {
    case Shape::binary_word: {
      const auto dev = load_word_pairs(*task.dev, dev_name(task));
      const auto test = load_word_pairs(task.test, task.name);
      sims = word_pair_sims(test, src);
      add_binary(rep, word_pair_sims(dev, src), labels_of(dev), sims, labels_of(test));
      break;
    }
    case Shape::graded_word: {
      const auto test = load_word_pairs(task.test, task.name);
      sims = word_pair_sims(test, src);
      rep["metric"] = "spearman";
      rep["value"] = spearman_rho(sims, golds_of(test));
      break;
    }
    case Shape::cosimlex: {
      const auto test = load_cosimlex(task.test, task.name);
      std::vector<double> gold;
      for (const auto& in : test) {
        const double s1 = word_similarity(src, in.a1, in.b1);
        const double s2 = word_similarity(src, in.a2, in.b2);
        sims.push_back(cosimlex_change(s1, s2));
        gold.push_back(in.gold_change);
      }
      rep["metric"] = "pearson";
      rep["value"] = pearson_r(sims, gold);
      break;
    }
    case Shape::sts: {
      const auto test = load_sentence_pairs(task.test, task.name);
      sims = sentence_pair_sims(test, src);
      std::vector<std::string> sub;
      for (const auto& in : test) sub.push_back(in.subcorpus);
      const auto score = sts_score(sims, golds_of(test), sub);
      rep["metric"] = "pearson_mean";
      rep["value"] = score.corpus;
      rep["subcorpora"] = score.per_subcorpus;
      if (!score.excluded.empty()) rep["excluded"] = score.excluded;
      break;
    }
    case Shape::binary_sentence: {
      const auto dev = load_sentence_pairs(*task.dev, dev_name(task));
      const auto test = load_sentence_pairs(task.test, task.name);
      sims = sentence_pair_sims(test, src);
      add_binary(rep, sentence_pair_sims(dev, src), labels_of(dev), sims, labels_of(test));
      break;
    }
  }
  rep["n"] = sims.size();
  rep["similarities"] = sims;
  return rep;
}

}  // namespace wic::evalkit
