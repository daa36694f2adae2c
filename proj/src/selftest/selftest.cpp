#include "wic/selftest/selftest.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <unistd.h>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "wic/corpus/align.hpp"
#include "wic/corpus/filter.hpp"
#include "wic/distiller/checkpoint.hpp"
#include "wic/evalkit/metrics.hpp"
#include "wic/nncore/gradcheck.hpp"
#include "wic/objective/losses.hpp"
#include "wic/provider/hsx1.hpp"
#include "wic/selftest/oracles.hpp"
#include "wic/trainer/trainer.hpp"
#include "wic/util/io.hpp"

namespace wic::selftest {

namespace fs = std::filesystem;

namespace {

template <class F>
CriterionResult timed(int id, std::string name, F body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len) {
  static const char* letters = "abcdefghijklmnopqrstuvwxyz";
  std::uniform_int_distribution<std::size_t> len(min_len, max_len), ch(0, 25);
  std::string w(len(rng), 'a');
  for (char& c : w) c = letters[ch(rng)];
  return w;
}

std::vector<double> random_vec(Rng& rng, std::size_t d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(d);
  for (double& x : v) x = u(rng);
  return v;
}

fs::path scratch(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto p = fs::temp_directory_path() /
           ("wic-selftest-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

}  // namespace

// ---------------------------------------------------------------- fixtures

SyntheticSetup synthetic_setup(std::size_t n, std::uint64_t seed) {
  Rng rng = split_rng(seed, "selftest.synthetic");
  std::vector<std::string> pool;
  std::set<std::string> seen;
  while (pool.size() < 60) {
    auto w = random_word(rng, 3, 9);  // some exceed the 6-character chunk
    if (seen.insert(w).second) pool.push_back(w);
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(5, 8);
  SyntheticSetup s;
  std::vector<std::vector<std::string>> sentences;
  for (std::size_t i = 0; i < n; ++i) {
    corpus::TrainingTriple t;
    t.id = "s" + std::to_string(i);
    t.mode = Mode::monolingual;
    std::vector<std::string> words(len(rng));
    for (auto& w : words) w = pool[pick(rng)];
    const std::size_t target = std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng);
    t.original = {words, target, "en"};
    auto para = words;
    para[target] = pool[pick(rng)];
    para[(target + 1) % para.size()] = pool[pick(rng)];
    t.positive = {para, target, "en"};
    auto neg = words;
    neg[target] = pool[pick(rng)];
    t.negative = {neg, target, "en"};
    sentences.push_back(t.original.tokens);
    sentences.push_back(t.positive.tokens);
    sentences.push_back(t.negative.tokens);
    s.triples.push_back(std::move(t));
  }
  sentences.push_back(pool);
  s.mlm.num_layers = 4;
  s.mlm.dim = 16;
  s.mlm.heads = 2;
  s.mlm.seed = seed;
  s.mlm.vocab = provider::build_vocabulary(sentences, s.mlm.subword_chunk);
  return s;
}

std::vector<corpus::TrainingTriple> scramble_negatives(std::vector<corpus::TrainingTriple> triples,
                                                       std::uint64_t seed) {
  Rng rng = split_rng(seed, "selftest.scramble");
  for (auto& t : triples) {
    for (auto& w : t.negative.tokens) w = random_word(rng, 2, 10);
  }
  return triples;
}

trainer::TrainConfig smoke_train_config(bool use_negatives) {
  trainer::TrainConfig c = trainer::TrainConfig::for_mode(Mode::monolingual);
  c.use_negatives = use_negatives;
  c.batch_size = 32;
  c.base_lr = 2e-2;
  c.warmup_steps = 10;
  c.weight_decay = 0.0;
  c.max_steps = 200;
  c.max_epochs = 200;
  c.seed = 11;
  return c;
}

// ---------------------------------------------------------------- criteria

CriterionResult gradient_fidelity() {
  return timed(1, "gradient fidelity", [](CriterionResult& r) {
    double worst = 0.0;
    std::size_t coords = 0;
    std::vector<std::string> failures;
    for (Mode mode : {Mode::monolingual, Mode::crosslingual}) {
      for (std::uint64_t seed : {1, 2, 3}) {
        auto cfg = distiller::DistillerConfig::for_mode(mode, 16, 4);
        cfg.seed = seed;
        auto model = distiller::DistillerModel<double>::init(cfg);
        Rng rng = split_rng(seed, "selftest.gradcheck");
        // Move off the symmetric initial point so every parameter carries signal.
        for (auto& p : model.params()) {
          for (double& v : p.value->flat()) v += std::uniform_real_distribution<double>(-0.05, 0.05)(rng);
        }
        std::array<nn::Tensor2D<double>, 3> top;
        std::array<std::vector<double>, 3> target;
        for (std::size_t s = 0; s < 3; ++s) {
          top[s] = nn::Tensor2D<double>(cfg.num_rows, cfg.dim, random_vec(rng, cfg.num_rows * cfg.dim, -2, 2));
          target[s] = distiller::reconstruction_target(top[s]);
        }
        const std::uint64_t mask_seed = mix_seed(seed * 977);
        auto forward = [&](std::array<distiller::DistilCache<double>, 3>* caches) {
          Rng drop(mask_seed);  // identical dropout masks on every evaluation
          objective::TripleRepresentations<double> reps;
          reps.mode = mode;
          std::array<distiller::DistilledPair<double>, 3> d;
          for (std::size_t s = 0; s < 3; ++s) d[s] = model.distil(top[s], true, &drop, caches ? &(*caches)[s] : nullptr);
          reps.original = {target[0], d[0]};
          reps.positive = {target[1], d[1]};
          reps.negative = {target[2], d[2]};
          return reps;
        };
        auto loss = [&] { return objective::total_loss(forward(nullptr)).total(); };
        auto grads = [&] {
          model.zero_grad();
          std::array<distiller::DistilCache<double>, 3> caches;
          const auto reps = forward(&caches);
          auto g = objective::TripleGradients<double>::zeros(cfg.dim);
          objective::total_loss(reps, &g);
          model.backward(caches[0], g.original.meaning, g.original.context);
          model.backward(caches[1], g.positive.meaning, g.positive.context);
          model.backward(caches[2], g.negative.meaning, g.negative.context);
        };
        auto params = model.params();
        nn::GradCheckOptions opts;
        opts.step = 1e-4;
        opts.tol = 1e-4;
        const auto rep = nn::check_gradients(params, loss, grads, opts);
        coords += rep.coords_checked;
        worst = std::max(worst, rep.max_rel_error);
        if (!rep.passed) {
          failures.push_back(std::string(to_string(mode)) + "/seed " + std::to_string(seed) + ": " +
                             (rep.diagnostic.empty() ? "worst in " + rep.worst_param : rep.diagnostic));
        }
      }
    }
    r.passed = failures.empty();
    r.detail = "max rel error " + fmt(worst) + " over " + std::to_string(coords) + " coordinates, 2 modes x 3 seeds";
    for (const auto& f : failures) r.detail += "; " + f;
  });
}

CriterionResult loss_formulas() {
  return timed(2, "loss formula equivalence", [](CriterionResult& r) {
    Rng rng = split_rng(2, "selftest.losses");
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 32)(rng);
      objective::TripleRepresentations<double> reps;
      for (auto* s : {&reps.original, &reps.positive, &reps.negative}) {
        s->target = random_vec(rng, d, -3, 3);
        s->distilled.meaning = random_vec(rng, d, -3, 3);
        s->distilled.context = random_vec(rng, d, -3, 3);
      }
      reps.mode = Mode::monolingual;
      worst = std::max(worst, std::abs(objective::cross_loss_mono(reps) - oracle::cross_mono(reps)));
      worst = std::max(worst, std::abs(objective::total_loss(reps).total() - oracle::total(reps)));
      reps.mode = Mode::crosslingual;
      worst = std::max(worst, std::abs(objective::cross_loss_xl(reps) - oracle::cross_xl(reps)));
      worst = std::max(worst, std::abs(objective::total_loss(reps).total() - oracle::total(reps)));
      reps.use_negatives = false;
      worst = std::max(worst, std::abs(objective::total_loss(reps).total() - oracle::total(reps)));
    }
    r.passed = worst <= 1e-10;
    r.detail = "max |library - oracle| = " + fmt(worst) + " on 100 random triples (mono, xl, no-negatives)";
  });
}

namespace {

struct SmokeRun {
  double initial = 0.0;
  double final = 0.0;
  std::vector<double> step_losses;
};

SmokeRun smoke_run(const provider::ToyMLM& mlm, const std::vector<corpus::TrainingTriple>& triples,
                   const trainer::TrainConfig& cfg) {
  // Negatives are encoded even when unused, so their content reaches the trainer.
  const auto data = trainer::encode_triples(mlm, triples, true, 1);
  auto dcfg = distiller::DistillerConfig::for_mode(cfg.mode, mlm.dim(), mlm.num_hidden_layers());
  dcfg.seed = cfg.seed;
  trainer::Trainer tr(distiller::DistillerModel<float>::init(dcfg), cfg);
  SmokeRun out;
  out.initial = tr.evaluate(data);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle = split_rng(cfg.seed, "selftest.smoke");
  while (tr.step() < cfg.max_steps) {
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t i = 0; i < order.size() && tr.step() < cfg.max_steps; i += cfg.batch_size) {
      std::vector<const trainer::EncodedTriple*> batch;
      for (std::size_t k = i; k < std::min(order.size(), i + cfg.batch_size); ++k) batch.push_back(&data[order[k]]);
      out.step_losses.push_back(tr.train_step(batch));
    }
  }
  out.final = tr.evaluate(data);
  return out;
}

}  // namespace

CriterionResult frozen_model() {
  return timed(3, "frozen-model contract", [](CriterionResult& r) {
    const auto setup = synthetic_setup(32, 5);
    const provider::ToyMLM mlm(setup.mlm);
    const std::uint64_t before = mlm.fingerprint();
    const auto run = smoke_run(mlm, setup.triples, smoke_train_config(true));
    const std::uint64_t after = mlm.fingerprint();
    r.passed = before == after && run.step_losses.size() == 200;
    std::ostringstream os;
    os << "provider hash " << std::hex << before << " -> " << after << std::dec << " across "
       << run.step_losses.size() << " training steps";
    r.detail = os.str();
  });
}

CriterionResult overfit_smoke() {
  return timed(4, "overfit smoke", [](CriterionResult& r) {
    const auto setup = synthetic_setup(32, 5);
    const provider::ToyMLM mlm(setup.mlm);
    const auto full = smoke_run(mlm, setup.triples, smoke_train_config(true));
    const double ratio = full.final / full.initial;

    const auto cfg = smoke_train_config(false);
    const auto a = smoke_run(mlm, setup.triples, cfg);
    const auto b = smoke_run(mlm, scramble_negatives(setup.triples, 99), cfg);
    bool finite = std::isfinite(a.final) && std::isfinite(b.final);
    double drift = std::abs(a.final - b.final);
    for (std::size_t i = 0; i < a.step_losses.size(); ++i) {
      finite = finite && std::isfinite(a.step_losses[i]);
      drift = std::max(drift, std::abs(a.step_losses[i] - b.step_losses[i]));
    }
    r.passed = ratio < 0.1 && finite && drift <= 1e-12 && a.step_losses.size() == b.step_losses.size();
    r.detail = "loss " + fmt(full.initial) + " -> " + fmt(full.final) + " (" + fmt(100 * ratio) +
               "% of initial) in 200 steps; no-negatives run finite=" + (finite ? "yes" : "no") +
               ", max drift under scrambled negatives " + fmt(drift);
  });
}

namespace {

oracle::Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, bool grid) {
  std::bernoulli_distribution missing(0.15);
  std::uniform_int_distribution<int> k(-8, 8);
  std::uniform_real_distribution<double> u(-1, 1);
  oracle::Matrix m(rows, std::vector<double>(cols));
  for (auto& row : m)
    for (double& v : row) v = grid ? k(rng) / 8.0 : u(rng);
  const double ninf = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i)
    if (missing(rng)) std::fill(m[i].begin(), m[i].end(), ninf);
  for (std::size_t j = 0; j < cols; ++j)
    if (missing(rng))
      for (auto& row : m) row[j] = ninf;
  return m;
}

}  // namespace

CriterionResult alignment_oracle() {
  return timed(5, "alignment oracle", [](CriterionResult& r) {
    Rng rng = split_rng(5, "selftest.align");
    std::uniform_int_distribution<std::size_t> size(1, 6);
    auto mono = corpus::FilterConfig::for_mode(Mode::monolingual);
    auto xl = corpus::FilterConfig::for_mode(Mode::crosslingual);
    std::size_t mismatches = 0, found_mono = 0, found_xl = 0, nonempty_a = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t rows = size(rng), cols = size(rng);
      const std::size_t t = std::uniform_int_distribution<std::size_t>(0, rows - 1)(rng);
      const auto m = random_matrix(rng, rows, cols, trial % 2 == 0);
      const auto a = corpus::mutual_argmax_align(m, t);
      std::set<std::pair<std::size_t, std::size_t>> got(a.pairs.begin(), a.pairs.end());
      if (got != oracle::mutual_pairs(m, t)) ++mismatches;
      const auto pm = corpus::align_target_mono(a, mono);
      const auto px = corpus::align_target_xl(a, xl);
      if (pm != oracle::align_mono(m, t, mono.sigma_mult)) ++mismatches;
      if (px != oracle::align_xl(m, t, xl.sigma_mult, xl.aligned_quantile)) ++mismatches;
      found_mono += pm.has_value();
      found_xl += px.has_value();
      nonempty_a += !a.pairs.empty();
    }
    // Sentence-level path: similarity matrix from an embedding table.
    double cos_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      corpus::EmbeddingTable z(4);
      std::vector<std::string> vocab;
      for (int w = 0; w < 8; ++w) {
        vocab.push_back("w" + std::to_string(w));
        if (w < 6) {
          auto v = random_vec(rng, 4, -1, 1);
          z.add(vocab.back(), std::vector<float>(v.begin(), v.end()));
        }
      }
      std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
      std::vector<std::string> s(size(rng)), sp(size(rng));
      for (auto& w : s) w = vocab[pick(rng)];
      for (auto& w : sp) w = vocab[pick(rng)];
      const auto m = corpus::similarity_matrix(s, sp, z);
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < sp.size(); ++j) {
          const auto *u = z.find(s[i]), *v = z.find(sp[j]);
          if (!u || !v) {
            if (std::isfinite(m[i][j])) ++mismatches;
          } else {
            cos_err = std::max(cos_err, std::abs(m[i][j] - oracle::cos(*u, *v)));
          }
        }
    }
    r.passed = mismatches == 0 && cos_err < 1e-12;
    r.detail = std::to_string(mismatches) + " mismatches over 500 instances (mono hits " + std::to_string(found_mono) +
               ", xl hits " + std::to_string(found_xl) + ", non-empty A " + std::to_string(nonempty_a) +
               "); similarity matrix max error " + fmt(cos_err);
  });
}

namespace {

struct FilterInstance {
  corpus::EmbeddingTable z{4};
  provider::MaskedPredictionSet preds;
  std::string w_t, w_p;
};

FilterInstance random_filter_instance(Rng& rng) {
  FilterInstance in;
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0, 1);
  auto vec_near = [&](const std::vector<float>& base, double mix) {
    std::vector<float> v(4);
    for (std::size_t i = 0; i < 4; ++i) v[i] = float(mix * base[i] + (1 - mix) * g(rng));
    return v;
  };
  std::vector<float> zt(4);
  for (auto& x : zt) x = float(g(rng));
  in.w_t = random_word(rng, 3, 7);
  in.z.add(in.w_t, zt);
  // w_p: either a near-copy of the surface (gate open) or unrelated.
  in.w_p = u(rng) < 0.5 ? in.w_t + "s" : random_word(rng, 3, 7);
  if (in.w_p != in.w_t) in.z.add(in.w_p, vec_near(zt, u(rng)));

  std::vector<std::string> tokens = {in.w_t, in.w_p, ".", ",", "42", "3.5", "!?"};
  std::string upper = in.w_t;
  upper[0] = char(std::toupper((unsigned char)upper[0]));
  tokens.push_back(upper);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 140)(rng);
  std::set<std::string> have(tokens.begin(), tokens.end());
  while (tokens.size() < n + 8) {
    auto w = u(rng) < 0.2 ? in.w_t.substr(0, 2) + random_word(rng, 1, 3) : random_word(rng, 2, 8);
    if (!have.insert(w).second) continue;
    if (u(rng) < 0.85) in.z.add(w, vec_near(zt, u(rng)));
    tokens.push_back(w);
  }
  std::shuffle(tokens.begin(), tokens.end(), rng);
  tokens.resize(std::min(tokens.size(), n));
  std::vector<double> p(tokens.size());
  double sum = 0;
  for (auto& x : p) sum += (x = std::pow(u(rng), 4.0));
  for (auto& x : p) x /= sum;
  if (u(rng) < 0.3 && !p.empty()) p[0] = p.size() > 1 ? p[1] : p[0];  // a tie
  std::vector<std::size_t> idx(tokens.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  for (std::size_t i : idx) {
    in.preds.tokens.push_back(tokens[i]);
    in.preds.probs.push_back(p[i]);
  }
  in.preds.vocab_size = tokens.size();
  return in;
}

}  // namespace

CriterionResult filtering_oracle() {
  return timed(6, "filtering oracle", [](CriterionResult& r) {
    Rng rng = split_rng(6, "selftest.filter");
    const auto mono = corpus::FilterConfig::for_mode(Mode::monolingual);
    const auto xl = corpus::FilterConfig::for_mode(Mode::crosslingual);
    std::size_t mismatches = 0, neg_mono = 0, enhanced = 0, neg_xl = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const auto in = random_filter_instance(rng);
      const auto a = corpus::select_negative_mono(in.preds, in.w_t, in.z, mono);
      const auto b = corpus::enhance_positive_mono(in.preds, in.w_t, in.w_p, in.z, mono);
      const auto c = corpus::select_negative_xl(in.preds, in.w_t, in.w_p, in.z, xl);
      mismatches += a != oracle::negative_mono(in.preds, in.w_t, in.z, mono);
      mismatches += b != oracle::enhance_mono(in.preds, in.w_t, in.w_p, in.z, mono);
      mismatches += c != oracle::negative_xl(in.preds, in.w_t, in.w_p, in.z, xl);
      neg_mono += a.has_value();
      enhanced += b.has_value();
      neg_xl += c.has_value();
    }
    r.passed = mismatches == 0;
    r.detail = std::to_string(mismatches) + " mismatches over 500 prediction sets (selected: mono negative " +
               std::to_string(neg_mono) + ", enhanced positive " + std::to_string(enhanced) + ", xl negative " +
               std::to_string(neg_xl) + ")";
  });
}

CriterionResult metric_oracles() {
  return timed(7, "metric oracles", [](CriterionResult& r) {
    Rng rng = split_rng(7, "selftest.metrics");
    std::size_t thr_mismatch = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
      std::vector<double> sims(n);
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        sims[i] = trial % 2 ? std::uniform_int_distribution<int>(-10, 105)(rng) / 100.0
                            : std::uniform_real_distribution<double>(-0.3, 1.1)(rng);
        labels[i] = std::bernoulli_distribution(0.5)(rng);
      }
      thr_mismatch += evalkit::tune_threshold(sims, labels) != oracle::grid_threshold(sims, labels);
    }
    double corr_err = 0.0;
    std::size_t corr_cases = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = trial % 2 ? std::uniform_int_distribution<int>(0, 5)(rng) : std::uniform_real_distribution<double>(-5, 5)(rng);
        y[i] = std::uniform_int_distribution<int>(0, 4)(rng) + (trial % 3 ? 0.0 : x[i]);
      }
      double p_lib, s_lib;
      try {
        p_lib = evalkit::pearson_r(x, y);
        s_lib = evalkit::spearman_rho(x, y);
      } catch (const UndefinedStatistic&) {
        continue;  // constant input: the oracle formula is 0/0 as well
      }
      corr_err = std::max({corr_err, std::abs(p_lib - oracle::pearson(x, y)), std::abs(s_lib - oracle::spearman(x, y))});
      ++corr_cases;
    }
    const double worked = evalkit::tune_threshold(std::vector<double>{0.2, 0.8}, std::vector<int>{0, 1});
    r.passed = thr_mismatch == 0 && corr_err <= 1e-10 && worked == 0.21;
    r.detail = std::to_string(thr_mismatch) + " threshold mismatches / 500; correlation max error " + fmt(corr_err) +
               " over " + std::to_string(corr_cases) + " tied/untied cases; worked example -> " + fmt(worked);
  });
}

CriterionResult layer_policy() {
  return timed(8, "layer policy", [](CriterionResult& r) {
    auto check = [](std::size_t l, std::size_t first, std::size_t last) {
      nn::Tensor2D<float> h(l + 1, 3);
      for (std::size_t i = 0; i <= l; ++i)
        for (std::size_t j = 0; j < 3; ++j) h(i, j) = float(i);
      const auto top = provider::select_top_layers(h, l);
      if (top.rows() != last - first + 1) return false;
      for (std::size_t i = 0; i < top.rows(); ++i)
        if (top(i, 0) != float(first + i)) return false;
      return true;
    };
    bool odd_rejected = false;
    try {
      provider::top_half_start(5);
    } catch (const ConfigError&) {
      odd_rejected = true;
    }
    const bool l24 = check(24, 13, 24), l4 = check(4, 3, 4), l12 = check(12, 7, 12);
    r.passed = l24 && l4 && l12 && odd_rejected;
    r.detail = std::string("l=24 -> layers 13..24 ") + (l24 ? "ok" : "WRONG") + ", l=4 -> 3..4 " + (l4 ? "ok" : "WRONG") +
               ", l=12 -> 7..12 " + (l12 ? "ok" : "WRONG") + ", odd l rejected " + (odd_rejected ? "yes" : "no");
  });
}

CriterionResult format_roundtrips() {
  return timed(10, "format round-trips", [](CriterionResult& r) {
    const auto setup = synthetic_setup(6, 10);
    const provider::ToyMLM mlm(setup.mlm);
    std::vector<provider::HiddenStack> stacks;
    for (const auto& t : setup.triples) {
      stacks.push_back(mlm.encode(t.id + ":a", t.original.tokens,
                                  provider::Span{t.original.target_index, t.original.target_index + 1}));
      stacks.push_back(mlm.encode(t.id + ":b", t.positive.tokens, std::nullopt));
    }
    const auto dir = scratch("formats");
    provider::write_hidden_states(dir / "a.meta.jsonl", dir / "a.bin", stacks);
    const auto back = provider::load_hidden_states(dir / "a.meta.jsonl", dir / "a.bin");
    provider::write_hidden_states(dir / "b.meta.jsonl", dir / "b.bin", back);
    const bool hsx_same = back == stacks && io::read_file(dir / "a.bin") == io::read_file(dir / "b.bin") &&
                          io::read_file(dir / "a.meta.jsonl") == io::read_file(dir / "b.meta.jsonl");

    auto cfg = distiller::DistillerConfig::for_mode(Mode::crosslingual, 16, 4);
    cfg.seed = 3;
    const auto model = distiller::DistillerModel<float>::init(cfg);
    distiller::CheckpointMeta meta;
    meta.mode = "crosslingual";
    meta.epoch = 4;
    meta.step = 77;
    meta.best_val_loss = 0.125;
    meta.provider_fingerprint = mlm.fingerprint();
    distiller::save_checkpoint(dir / "a.ckpt", model, meta);
    const auto loaded = distiller::load_checkpoint(dir / "a.ckpt");
    distiller::save_checkpoint(dir / "b.ckpt", loaded.model, loaded.meta);
    const bool ckpt_same = io::read_file(dir / "a.ckpt") == io::read_file(dir / "b.ckpt") && loaded.meta == meta;
    fs::remove_all(dir);
    r.passed = hsx_same && ckpt_same;
    r.detail = std::string("HSX1 (") + std::to_string(stacks.size()) + " records) " +
               (hsx_same ? "identical" : "DIFFERS") + ", checkpoint " + (ckpt_same ? "identical" : "DIFFERS");
  });
}

CriterionResult pipeline_determinism(const PipelineRunner& run, const std::string& scratch_dir) {
  return timed(9, "end-to-end determinism", [&](CriterionResult& r) {
    const fs::path base = scratch_dir;
    std::array<fs::path, 2> dirs = {base / "run1", base / "run2"};
    for (const auto& d : dirs) {
      fs::remove_all(d);
      fs::create_directories(d);
      std::string err;
      if (!run(d.string(), err)) {
        r.passed = false;
        r.detail = "pipeline failed in " + d.string() + ": " + err;
        return;
      }
    }
    std::vector<std::string> files, differing;
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), dirs[0]);
      files.push_back(rel.string());
      const auto other = dirs[1] / rel;
      if (!fs::exists(other) || io::read_file(e.path()) != io::read_file(other)) differing.push_back(rel.string());
    }
    std::size_t count2 = 0;
    for (const auto& e : fs::recursive_directory_iterator(dirs[1])) count2 += e.is_regular_file();
    r.passed = !files.empty() && differing.empty() && count2 == files.size();
    r.detail = std::to_string(files.size()) + " output files compared, " + std::to_string(differing.size()) + " differ";
    for (const auto& d : differing) r.detail += "; " + d;
    if (r.seconds > 300) r.passed = false;
  });
}

PipelineRunner cli_pipeline(std::string binary, std::string fixture_dir, std::string config_file) {
  return [=](const std::string& out_dir, std::string& error) {
    const fs::path out = fs::absolute(out_dir);
    const std::string log = out.string() + ".log";
    auto q = [](const std::string& s) { return "'" + s + "'"; };
    const std::string bin = q(fs::absolute(binary).string());
    const std::string common = " --config " + q(config_file);
    const std::string ck = q((out / "model" / "model.ckpt").string());
    const std::vector<std::string> steps = {
        "build-corpus --out " + q((out / "corpus").string()),
        "train --train " + q((out / "corpus" / "train.jsonl").string()) + " --validation " +
            q((out / "corpus" / "validation.jsonl").string()) + " --out " + q((out / "model").string()),
        "evaluate --checkpoint " + ck + " --out " + q((out / "eval").string()),
        "analyze --checkpoint " + ck + " --out " + q((out / "analysis").string()),
    };
    for (const auto& s : steps) {
      const std::string cmd = "cd " + q(fixture_dir) + " && " + bin + common + " " + s + " 2>>" + q(log);
      if (std::system(cmd.c_str()) != 0) {
        error = "command failed (see " + log + "): " + s.substr(0, s.find(' '));
        return false;
      }
    }
    return true;
  };
}

std::vector<CriterionResult> run_core() {
  return {gradient_fidelity(), loss_formulas(),  frozen_model(), overfit_smoke(),    alignment_oracle(),
          filtering_oracle(),  metric_oracles(), layer_policy(), format_roundtrips()};
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.name << " (" << fmt(r.seconds)
     << "s): " << r.detail;
  return os.str();
}

}  // namespace wic::selftest
