#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "wic/cli/commands.hpp"
#include "wic/selftest/selftest.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/log.hpp"

namespace fs = std::filesystem;
using namespace wic;

namespace {

template <class T>
void apply(const std::optional<T>& v, T& dst) {
  if (v) dst = *v;
}

struct Globals {
  cli::ProviderOptions provider;
  std::string mode = "monolingual";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string log_level = "info";
};

struct FilterFlags {
  std::optional<double> lambda, delta, sigma, quantile, val_fraction;
  std::optional<std::size_t> top_k, edit_gate, cap;

  corpus::FilterConfig resolve(Mode mode, std::uint64_t seed) const {
    auto c = corpus::FilterConfig::for_mode(mode);
    apply(lambda, c.lambda);
    apply(delta, c.delta);
    apply(sigma, c.sigma_mult);
    apply(quantile, c.aligned_quantile);
    apply(val_fraction, c.validation_fraction);
    apply(top_k, c.top_k);
    apply(edit_gate, c.edit_gate);
    apply(cap, c.per_target_cap);
    c.seed = seed;
    return c;
  }
};

struct TrainFlags {
  bool no_negatives = false;
  std::optional<std::size_t> batch, warmup, patience, max_epochs, max_steps;
  std::optional<double> lr, wd, min_delta;

  trainer::TrainConfig resolve(Mode mode, std::uint64_t seed, std::size_t threads) const {
    auto c = trainer::TrainConfig::for_mode(mode);
    c.use_negatives = !no_negatives;
    apply(batch, c.batch_size);
    apply(warmup, c.warmup_steps);
    apply(patience, c.patience);
    apply(max_epochs, c.max_epochs);
    apply(max_steps, c.max_steps);
    apply(lr, c.base_lr);
    apply(wd, c.weight_decay);
    apply(min_delta, c.min_delta);
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

int run_selftest(const std::string& fixture, const std::string& fixture_config, const std::string& scratch) {
  auto results = selftest::run_core();
  if (!fixture.empty()) {
    const fs::path dir = scratch.empty() ? fs::temp_directory_path() / "wic-selftest-pipeline" : fs::path(scratch);
    fs::create_directories(dir);
    const auto runner = selftest::cli_pipeline(fs::read_symlink("/proc/self/exe").string(), fixture, fixture_config);
    results.push_back(selftest::pipeline_determinism(runner, dir.string()));
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  bool ok = true;
  for (const auto& r : results) {
    std::cout << selftest::format_line(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distils meaning and context representations of words from a frozen masked LM."};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Config file (TOML); command-line flags override it");
  app.require_subcommand(1);

  Globals g;
  app.add_option("--mode", g.mode, "monolingual | crosslingual")->check(CLI::IsMember({"monolingual", "crosslingual"}));
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--threads", g.threads, "Upper bound on worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--log-level", g.log_level)->check(CLI::IsMember({"debug", "info", "warn", "error"}));
  auto& p = g.provider;
  app.add_option("--provider", p.kind, "toy | hsx1");
  app.add_option("--vocab", p.vocab, "Toy MLM word list");
  app.add_option("--toy-layers", p.layers);
  app.add_option("--toy-dim", p.dim);
  app.add_option("--toy-heads", p.heads);
  app.add_option("--toy-ffn-mult", p.ffn_mult);
  app.add_option("--toy-chunk", p.subword_chunk, "Subword length in code points");
  app.add_option("--toy-seed", p.seed);
  app.add_option("--hidden-meta", p.hsx1_meta, "HSX1 metadata (JSONL)");
  app.add_option("--hidden-bin", p.hsx1_bin, "HSX1 payload");

  // build-corpus
  auto* bc = app.add_subcommand("build-corpus", "Generate training triples from sentence pairs");
  cli::BuildCorpusOptions bco;
  FilterFlags ff;
  bc->add_option("--pairs", bco.pairs, "Sentence pairs (JSONL)");
  bc->add_option("--embeddings", bco.embeddings, "Static word vectors (text format)");
  bc->add_option("--out", bco.out_dir, "Output directory");
  bc->add_option("--lambda", ff.lambda, "Max cosine between target and a negative");
  bc->add_option("--top-k", ff.top_k);
  bc->add_option("--delta", ff.delta, "Minimum prediction probability");
  bc->add_option("--sigma", ff.sigma, "Std-dev multiplier for alignment");
  bc->add_option("--aligned-quantile", ff.quantile);
  bc->add_option("--edit-gate", ff.edit_gate);
  bc->add_option("--cap", ff.cap, "Triples per target word, 0 = unlimited");
  bc->add_option("--validation-fraction", ff.val_fraction);

  // train
  auto* tr = app.add_subcommand("train", "Train the distillers");
  cli::TrainOptions tro;
  TrainFlags tf;
  std::string resume;
  tr->add_option("--train", tro.train, "Training triples (JSONL)");
  tr->add_option("--validation", tro.validation, "Validation triples (JSONL)");
  tr->add_option("--out", tro.out_dir, "Output directory");
  tr->add_option("--resume", resume, "Continue from a checkpoint");
  tr->add_flag("--no-negatives", tf.no_negatives, "Drop every negative-sample loss term");
  tr->add_option("--batch-size", tf.batch);
  tr->add_option("--lr", tf.lr, "Peak learning rate");
  tr->add_option("--warmup", tf.warmup, "Linear warmup steps");
  tr->add_option("--weight-decay", tf.wd);
  tr->add_option("--patience", tf.patience);
  tr->add_option("--min-delta", tf.min_delta);
  tr->add_option("--max-epochs", tf.max_epochs);
  tr->add_option("--max-steps", tf.max_steps, "0 = no limit");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score representations on similarity tasks");
  cli::EvaluateOptions evo;
  std::vector<std::string> kinds;
  std::string ev_ckpt;
  ev->add_option("--task", evo.tasks, "type:test[:dev], repeatable");
  ev->add_option("--kind", kinds, "baseline | meaning | context, repeatable (default: all)");
  ev->add_option("--checkpoint", ev_ckpt);
  ev->add_option("--out", evo.out_dir, "Output directory");

  // analyze
  auto* an = app.add_subcommand("analyze", "Bucketed word similarities and the layer-wise matrix");
  cli::AnalyzeOptions ano;
  an->add_option("--pairs", ano.pairs, "Labelled sentence pairs (TSV)");
  an->add_option("--targets", ano.targets, "Target words (TSV)");
  an->add_option("--checkpoint", ano.checkpoint);
  an->add_option("--out", ano.out_dir, "Output directory");

  // export-hidden
  auto* ex = app.add_subcommand("export-hidden", "Write toy-MLM hidden states as HSX1 files");
  cli::ExportHiddenOptions exo;
  ex->add_option("--triples", exo.triples, "Triple files, repeatable");
  ex->add_option("--task", exo.tasks, "Task specs, repeatable");
  ex->add_option("--targets", exo.targets, "Target files, repeatable");
  ex->add_option("--out-meta", exo.out_meta);
  ex->add_option("--out-bin", exo.out_bin);

  // selftest
  auto* st = app.add_subcommand("selftest", "Run the gradient checks and oracle suites");
  std::string fixture, fixture_config = "fixture.toml", scratch;
  st->add_option("--fixture", fixture, "Fixture directory; adds the end-to-end determinism run");
  st->add_option("--fixture-config", fixture_config, "Config file inside the fixture directory");
  st->add_option("--scratch", scratch, "Where the two pipeline runs go");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  log::set_threshold(g.log_level == "debug"  ? log::Level::debug
                     : g.log_level == "warn" ? log::Level::warn
                     : g.log_level == "error" ? log::Level::error
                                              : log::Level::info);
  log::info("effective config:\n", app.config_to_str(true, false));

  try {
    const Mode mode = parse_mode(g.mode);
    if (*bc) {
      bco.filter = ff.resolve(mode, g.seed);
      const auto& f = bco.filter;
      log::info("filter: lambda=", f.lambda, " top_k=", f.top_k, " delta=", f.delta, " sigma=", f.sigma_mult,
                " quantile=", f.aligned_quantile, " edit_gate=", f.edit_gate, " cap=", f.per_target_cap,
                " validation_fraction=", f.validation_fraction);
      bco.provider = p;
      bco.threads = g.threads;
      cli::build_corpus(bco);
    } else if (*tr) {
      tro.train_cfg = tf.resolve(mode, g.seed, g.threads);
      const auto& c = tro.train_cfg;
      log::info("training: use_negatives=", c.use_negatives, " batch=", c.batch_size, " lr=", c.base_lr,
                " warmup=", c.warmup_steps, " weight_decay=", c.weight_decay, " patience=", c.patience,
                " min_delta=", c.min_delta, " max_epochs=", c.max_epochs, " max_steps=", c.max_steps);
      tro.provider = p;
      if (!resume.empty()) tro.resume = resume;
      cli::train(tro);
    } else if (*ev) {
      if (!kinds.empty()) {
        evo.kinds.clear();
        for (const auto& k : kinds) evo.kinds.push_back(evalkit::parse_rep_kind(k));
      }
      if (!ev_ckpt.empty()) evo.checkpoint = ev_ckpt;
      evo.provider = p;
      cli::evaluate(evo);
    } else if (*an) {
      ano.provider = p;
      cli::analyze(ano);
    } else if (*ex) {
      exo.provider = p;
      cli::export_hidden(exo);
    } else if (*st) {
      return run_selftest(fixture, fixture_config, scratch);
    }
  } catch (const ConfigError& e) {
    log::write(log::Level::error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log::write(log::Level::error, e.what());
    return 1;
  }
  return 0;
}
