#include "wic/cli/commands.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wic/corpus/build.hpp"
#include "wic/corpus/embedding_table.hpp"
#include "wic/corpus/records.hpp"
#include "wic/distiller/checkpoint.hpp"
#include "wic/evalkit/analysis.hpp"
#include "wic/evalkit/tasks.hpp"
#include "wic/provider/hsx1.hpp"
#include "wic/trainer/trainer.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"
#include "wic/util/log.hpp"

namespace wic::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("missing required path: ") + what);
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

// Outputs are buffered and only land on disk once the command has finished.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_.emplace_back(dir_ / name, std::move(content)); }
  void add_path(fs::path p, std::string content) { files_.emplace_back(std::move(p), std::move(content)); }
  void commit() {
    for (const auto& [p, _] : files_)
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
    for (const auto& [p, c] : files_) io::write_file_atomic(p, c);
  }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> read_words(const fs::path& p) {
  std::vector<std::string> words;
  for (auto& line : io::read_lines(p)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

distiller::Checkpoint load_checked(const fs::path& p, const provider::HiddenStateProvider& prov) {
  require_file(p, "checkpoint");
  auto ck = distiller::load_checkpoint(p);
  const auto& cfg = ck.model.config;
  const std::size_t l = prov.num_hidden_layers();
  if (cfg.dim != prov.dim() || cfg.num_rows != l - provider::top_half_start(l) + 1) {
    throw ConfigError("checkpoint " + p.string() + " does not fit the configured provider");
  }
  if (ck.meta.provider_fingerprint != prov.fingerprint()) {
    log::warn("checkpoint ", p.string(), " was trained against a different provider");
  }
  return ck;
}

}  // namespace

void ProviderOptions::validate() const {
  if (kind == "toy") {
    require_file(vocab, "provider vocabulary");
    toy_config(*this).validate();
  } else if (kind == "hsx1") {
    require_file(hsx1_meta, "HSX1 metadata");
    require_file(hsx1_bin, "HSX1 payload");
  } else {
    throw ConfigError("provider kind must be toy or hsx1, got '" + kind + "'");
  }
}

provider::ToyMLMConfig toy_config(const ProviderOptions& o) {
  provider::ToyMLMConfig c;
  c.num_layers = o.layers;
  c.dim = o.dim;
  c.heads = o.heads;
  c.ffn_mult = o.ffn_mult;
  c.subword_chunk = o.subword_chunk;
  c.seed = o.seed;
  if (!o.vocab.empty() && fs::exists(o.vocab)) c.vocab = provider::build_vocabulary({read_words(o.vocab)}, c.subword_chunk);
  return c;
}

std::unique_ptr<provider::HiddenStateProvider> make_provider(const ProviderOptions& o) {
  o.validate();
  if (o.kind == "hsx1") return std::make_unique<provider::FileProvider>(o.hsx1_meta, o.hsx1_bin);
  return std::make_unique<provider::ToyMLM>(toy_config(o));
}

void build_corpus(const BuildCorpusOptions& o) {
  require_file(o.pairs, "pair file");
  require_file(o.embeddings, "embedding table");
  if (o.out_dir.empty()) throw ConfigError("missing required path: output directory");
  o.filter.validate();
  if (o.provider.kind != "toy") throw ConfigError("build-corpus needs masked predictions; use the toy provider");
  o.provider.validate();

  const provider::ToyMLM mlm(toy_config(o.provider));
  const auto z = corpus::load_embedding_table(o.embeddings);
  log::info("embeddings: ", z.size(), " words, dim ", z.dim(), ", ", z.malformed_lines, " malformed lines skipped");
  std::ifstream in(o.pairs);
  if (!in) throw ConfigError("cannot open pair file: " + o.pairs.string());
  const auto res = corpus::build_corpus(in, mlm, z, o.filter, o.threads);

  Outputs out(o.out_dir);
  out.add("train.jsonl", corpus::triples_to_jsonl(res.train));
  out.add("validation.jsonl", corpus::triples_to_jsonl(res.validation));
  out.add("stats.json", dump(res.stats.to_json()));
  out.commit();
  log::info("build-corpus: ", res.stats.emitted, " triples (", res.stats.train, " train, ", res.stats.validation,
            " validation)");
}

void train(const TrainOptions& o) {
  require_file(o.train, "training triples");
  if (!o.validation.empty()) require_file(o.validation, "validation triples");
  if (o.resume) require_file(*o.resume, "resume checkpoint");
  if (o.out_dir.empty()) throw ConfigError("missing required path: output directory");
  o.train_cfg.validate();
  const auto prov = make_provider(o.provider);
  const auto& cfg = o.train_cfg;

  auto load = [&](const fs::path& p) {
    auto f = corpus::read_triples(p);
    if (f.skipped) log::warn(p.string(), ": skipped ", f.skipped, " corrupt lines");
    if (f.triples.empty() && f.skipped) throw FormatError(p.string() + ": every line was corrupt");
    for (const auto& t : f.triples)
      if (t.mode != cfg.mode)
        throw ConfigError(p.string() + ": triple " + t.id + " is " + std::string(to_string(t.mode)) +
                          " but training mode is " + std::string(to_string(cfg.mode)));
    return f;
  };
  const auto train_file = load(o.train);
  if (train_file.triples.empty()) throw ConfigError(o.train.string() + ": no training triples");
  const auto val_file = o.validation.empty() ? corpus::TripleFile{} : load(o.validation);

  auto dcfg = distiller::DistillerConfig::for_mode(cfg.mode, prov->dim(), prov->num_hidden_layers());
  dcfg.seed = cfg.seed;
  auto model = distiller::DistillerModel<float>::init(dcfg);
  std::size_t start_step = 0;
  std::optional<double> resumed_from;
  if (o.resume) {
    auto ck = load_checked(*o.resume, *prov);
    if (ck.meta.mode != to_string(cfg.mode)) throw ConfigError("resume checkpoint was trained in " + ck.meta.mode + " mode");
    model = std::move(ck.model);
    start_step = ck.meta.step;
    resumed_from = ck.meta.best_val_loss;
  }

  const auto train_data = trainer::encode_triples(*prov, train_file.triples, cfg.use_negatives, cfg.threads);
  const auto val_data = trainer::encode_triples(*prov, val_file.triples, cfg.use_negatives, cfg.threads);

  trainer::Trainer tr(std::move(model), cfg, start_step);
  ordered_json summary;
  if (resumed_from) {
    const double v = tr.evaluate(val_data.empty() ? train_data : val_data);
    log::info("resumed at step ", start_step, ": validation loss ", v, " (checkpoint recorded ", *resumed_from, ")");
    if (v != *resumed_from) log::warn("resumed validation loss differs from the checkpoint record");
    summary["resume_step"] = start_step;
    summary["resume_val_loss"] = v;
  }
  const auto res = tr.fit(train_data, val_data);

  std::string history;
  for (const auto& r : res.history) history += r.to_json().dump() + "\n";
  distiller::CheckpointMeta meta;
  meta.mode = std::string(to_string(cfg.mode));
  meta.use_negatives = cfg.use_negatives;
  meta.epoch = res.best_epoch;
  meta.step = res.steps;
  meta.best_val_loss = res.best_val_loss;
  meta.provider_fingerprint = prov->fingerprint();

  summary["mode"] = meta.mode;
  summary["use_negatives"] = cfg.use_negatives;
  summary["train_triples"] = train_file.triples.size();
  summary["validation_triples"] = val_file.triples.size();
  summary["skipped_lines"] = train_file.skipped + val_file.skipped;
  summary["epochs"] = res.history.size();
  summary["steps"] = res.steps;
  summary["best_epoch"] = res.best_epoch;
  summary["best_val_loss"] = res.best_val_loss;
  summary["stopped_early"] = res.stopped_early;

  Outputs out(o.out_dir);
  out.add("model.ckpt", distiller::encode_checkpoint(res.best_model, meta));
  out.add("history.jsonl", history);
  out.add("train.json", dump(summary));
  out.commit();
}

void evaluate(const EvaluateOptions& o) {
  if (o.tasks.empty()) throw ConfigError("evaluate: no tasks given");
  if (o.out_dir.empty()) throw ConfigError("missing required path: output directory");
  std::vector<evalkit::TaskSpec> tasks;
  std::set<std::string> names;
  for (const auto& s : o.tasks) {
    tasks.push_back(evalkit::parse_task_spec(s));
    require_file(tasks.back().test, "task file");
    if (tasks.back().dev) require_file(*tasks.back().dev, "dev file");
    if (!names.insert(tasks.back().name).second) throw ConfigError("two tasks share the name " + tasks.back().name);
  }
  bool need_model = false;
  for (auto k : o.kinds) need_model = need_model || k != evalkit::RepKind::baseline;
  if (need_model && !o.checkpoint) throw ConfigError("meaning/context representations need --checkpoint");
  const auto prov = make_provider(o.provider);
  std::optional<distiller::Checkpoint> ck;
  if (need_model) ck = load_checked(*o.checkpoint, *prov);

  Outputs out(o.out_dir);
  ordered_json summary = ordered_json::array();
  for (const auto& task : tasks) {
    for (auto kind : o.kinds) {
      const evalkit::RepresentationSource src(kind, *prov, ck ? &ck->model : nullptr);
      const auto report = evalkit::run_task(task, src);
      log::info(task.name, " [", evalkit::to_string(kind), "] ", report.at("metric").get<std::string>(), " = ",
                report.at("value").get<double>());
      summary.push_back({{"task", task.name},
                         {"type", task.type},
                         {"kind", evalkit::to_string(kind)},
                         {"metric", report.at("metric")},
                         {"value", report.at("value")}});
      out.add(task.name + "." + std::string(evalkit::to_string(kind)) + ".json", dump(report));
    }
  }
  out.add("summary.json", dump(summary));
  out.commit();
}

void analyze(const AnalyzeOptions& o) {
  require_file(o.pairs, "labelled pair file");
  require_file(o.targets, "target file");
  if (o.out_dir.empty()) throw ConfigError("missing required path: output directory");
  const auto prov = make_provider(o.provider);
  const auto ck = load_checked(o.checkpoint, *prov);

  const auto pairs = evalkit::load_sentence_pairs(o.pairs, o.pairs.stem().string());
  ordered_json buckets;
  for (auto kind : {evalkit::RepKind::baseline, evalkit::RepKind::meaning, evalkit::RepKind::context}) {
    const evalkit::RepresentationSource src(kind, *prov, &ck.model);
    std::vector<evalkit::BucketPair> bp;
    for (const auto& p : pairs) {
      bp.push_back({evalkit::word_representations(src, p.a), evalkit::word_representations(src, p.b), p.gold >= 0.5});
    }
    buckets[std::string(evalkit::to_string(kind))] = evalkit::bucketed_similarity(bp).to_json();
  }

  const auto targets = evalkit::load_targets(o.targets, o.targets.stem().string());
  if (targets.empty()) throw ConfigError(o.targets.string() + ": no targets");
  std::vector<nn::Tensor2D<float>> per_layer;
  for (const auto& t : targets) per_layer.push_back(provider::pool_target_subwords(prov->encode(t.key, t.words, t.target)));
  const auto m = evalkit::layerwise_similarity(ck.model, per_layer, prov->num_hidden_layers());

  static const char* rows[] = {"baseline", "meaning", "context"};
  ordered_json lj;
  lj["rows"] = {"baseline", "meaning", "context"};
  lj["layers"] = ordered_json::array();
  for (std::size_t c = 0; c < m.cols(); ++c) lj["layers"].push_back(c);
  lj["targets"] = targets.size();
  lj["values"] = ordered_json::array();
  std::ostringstream tsv;
  tsv.precision(17);
  tsv << "kind";
  for (std::size_t c = 0; c < m.cols(); ++c) tsv << "\tlayer" << c;
  tsv << "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    tsv << rows[r];
    for (std::size_t c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
      tsv << "\t" << m(r, c);
    }
    tsv << "\n";
    lj["values"].push_back(row);
  }

  Outputs out(o.out_dir);
  out.add("buckets.json", dump(buckets));
  out.add("layerwise.json", dump(lj));
  out.add("layerwise.tsv", tsv.str());
  out.commit();
}

void export_hidden(const ExportHiddenOptions& o) {
  if (o.out_meta.empty() || o.out_bin.empty()) throw ConfigError("export-hidden: --out-meta and --out-bin are required");
  if (o.provider.kind != "toy") throw ConfigError("export-hidden runs the toy provider");
  for (const auto& p : o.triples) require_file(p, "triple file");
  for (const auto& p : o.targets) require_file(p, "target file");
  std::vector<evalkit::TaskSpec> tasks;
  for (const auto& s : o.tasks) tasks.push_back(evalkit::parse_task_spec(s));
  const auto prov = make_provider(o.provider);

  std::vector<evalkit::SentenceRef> refs;
  for (const auto& p : o.triples) {
    for (const auto& t : corpus::read_triples(p).triples) {
      const std::array<const corpus::SentenceRecord*, 3> recs = {&t.original, &t.positive, &t.negative};
      for (std::size_t w = 0; w < 3; ++w) {
        refs.push_back({trainer::sample_key(t.id, w), recs[w]->tokens,
                        provider::Span{recs[w]->target_index, recs[w]->target_index + 1}});
      }
    }
  }
  for (const auto& t : tasks)
    for (auto& r : evalkit::task_sentences(t)) refs.push_back(std::move(r));
  for (const auto& p : o.targets)
    for (auto& r : evalkit::load_targets(p, p.stem().string())) refs.push_back(std::move(r));

  std::set<std::string> seen;
  std::vector<provider::HiddenStack> stacks;
  for (const auto& r : refs) {
    if (!seen.insert(r.key).second) continue;
    stacks.push_back(prov->encode(r.key, r.words, r.target));
  }
  const auto enc = provider::encode_hsx1(stacks);
  Outputs out({});
  out.add_path(o.out_meta, enc.meta);
  out.add_path(o.out_bin, enc.bin);
  out.commit();
  log::info("export-hidden: ", stacks.size(), " sentences");
}

}  // namespace wic::cli
