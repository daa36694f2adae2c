#include <doctest.h>

#include "helpers.hpp"
#include "wic/distiller/checkpoint.hpp"
#include "wic/distiller/model.hpp"
#include "wic/nncore/encoder.hpp"
#include "wic/nncore/ops.hpp"
#include "wic/objective/losses.hpp"
#include "wic/selftest/oracles.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"

using namespace wic;
using nn::Tensor2D;
using Reps = objective::TripleRepresentations<double>;

namespace {

distiller::DistillerModel<double> model_d(Mode mode, std::uint64_t seed, double dropout = 0.1) {
  auto cfg = distiller::DistillerConfig::for_mode(mode, 16, 4);
  cfg.seed = seed;
  cfg.dropout = dropout;
  return distiller::DistillerModel<double>::init(cfg);
}

Reps random_reps(Rng& rng, std::size_t d, Mode mode) {
  Reps r;
  r.mode = mode;
  for (auto* s : {&r.original, &r.positive, &r.negative}) {
    s->target = testutil::random_doubles(rng, d, -2, 2);
    s->distilled.meaning = testutil::random_doubles(rng, d, -2, 2);
    s->distilled.context = testutil::random_doubles(rng, d, -2, 2);
  }
  return r;
}

std::vector<std::vector<double>*> all_vectors(Reps& r) {
  return {&r.original.distilled.meaning, &r.original.distilled.context, &r.positive.distilled.meaning,
          &r.positive.distilled.context, &r.negative.distilled.meaning, &r.negative.distilled.context};
}

std::vector<std::vector<double>*> all_grads(objective::TripleGradients<double>& g) {
  return {&g.original.meaning, &g.original.context, &g.positive.meaning,
          &g.positive.context, &g.negative.meaning, &g.negative.context};
}

}  // namespace

TEST_SUITE("distiller") {
  TEST_CASE("per-mode defaults") {
    const auto m = distiller::DistillerConfig::for_mode(Mode::monolingual, 16, 4);
    const auto x = distiller::DistillerConfig::for_mode(Mode::crosslingual, 16, 24);
    CHECK(m.ffn_mult == 4);
    CHECK(x.ffn_mult == 6);
    CHECK(m.heads == 8);
    CHECK(m.num_rows == 2);
    CHECK(x.num_rows == 12);
    CHECK(m.dropout == 0.1);
  }

  TEST_CASE("distil: shapes, determinism without dropout, shape errors") {
    auto m = model_d(Mode::monolingual, 1, 0.0);
    Rng rng(2);
    const auto x = testutil::random_tensor<double>(rng, 2, 16);
    const auto a = m.distil(x, false, nullptr), b = m.distil(x, false, nullptr);
    CHECK(a.meaning.size() == 16);
    CHECK(a.context.size() == 16);
    CHECK(a.meaning == b.meaning);
    CHECK(a.context == b.context);
    CHECK(a.meaning != a.context);
    CHECK_THROWS_AS(m.distil(Tensor2D<double>(3, 16), false, nullptr), ConfigError);
  }

  TEST_CASE("distil equals pooling of an encoder layer over input plus layer positions") {
    auto m = model_d(Mode::crosslingual, 3, 0.0);
    Rng rng(4);
    const auto x = testutil::random_tensor<double>(rng, 2, 16, -2, 2);
    const auto got = m.distil(x, false, nullptr);
    const auto xp = nn::add(x, m.layer_pos);
    const auto em = nn::mean_pool(nn::transformer_encoder_layer(xp, m.meaning, m.config.encoder(), false, nullptr));
    const auto ec = nn::mean_pool(nn::transformer_encoder_layer(xp, m.context, m.config.encoder(), false, nullptr));
    for (std::size_t j = 0; j < 16; ++j) {
      CHECK(got.meaning[j] == doctest::Approx(em[j]).epsilon(1e-13));
      CHECK(got.context[j] == doctest::Approx(ec[j]).epsilon(1e-13));
    }
  }

  TEST_CASE("residual-only path pools the normalised input") {
    auto m = model_d(Mode::monolingual, 5, 0.0);
    m.layer_pos.fill(0);
    for (auto* w : {&m.meaning, &m.context}) {
      w->wo.fill(0), w->bo.fill(0), w->w2.fill(0), w->b2.fill(0);
    }
    Rng rng(6);
    const auto x = testutil::random_tensor<double>(rng, 2, 16, -3, 3);
    const auto got = m.distil(x, false, nullptr);
    // Two plain layer norms in a row; written out by hand.
    std::vector<double> expect(16, 0.0);
    const double eps = m.config.ln_eps;
    for (std::size_t r = 0; r < 2; ++r) {
      std::vector<double> v(x.row(r).begin(), x.row(r).end());
      for (int pass = 0; pass < 2; ++pass) {
        double mu = 0, var = 0;
        for (double e : v) mu += e / 16;
        for (double e : v) var += (e - mu) * (e - mu) / 16;
        for (double& e : v) e = (e - mu) / std::sqrt(var + eps);
      }
      for (std::size_t j = 0; j < 16; ++j) expect[j] += v[j] / 2;
    }
    for (std::size_t j = 0; j < 16; ++j) {
      CHECK(got.meaning[j] == doctest::Approx(expect[j]).epsilon(1e-12));
      CHECK(got.context[j] == doctest::Approx(expect[j]).epsilon(1e-12));
    }
  }

  TEST_CASE("reconstruction target and reconstruction") {
    const Tensor2D<double> one(1, 2, std::vector<double>{3, -1});
    CHECK(distiller::reconstruction_target(one) == std::vector<double>{3, -1});
    const Tensor2D<double> two(2, 2, std::vector<double>{0, 2, 2, 0});
    CHECK(distiller::reconstruction_target(two) == std::vector<double>{1, 1});
    CHECK(distiller::reconstruction_target(two) == nn::mean_pool(two));

    const std::vector<double> v{0.5, -2}, a{2, 0}, b{0, 2};
    CHECK(distiller::reconstruct<double>(v, v) == v);
    CHECK(distiller::reconstruct<double>(a, b) == std::vector<double>{1, 1});
    CHECK(distiller::reconstruct<double>(b, a) == distiller::reconstruct<double>(a, b));
  }

  TEST_CASE("dropout is active in training mode only") {
    auto m = model_d(Mode::monolingual, 7);
    Rng rng(8);
    const auto x = testutil::random_tensor<double>(rng, 2, 16);
    Rng d1(1), d2(2);
    CHECK(m.distil(x, true, &d1).meaning != m.distil(x, true, &d2).meaning);
    CHECK(m.distil(x, false, nullptr).meaning == m.distil(x, false, nullptr).meaning);
  }

  TEST_CASE("checkpoint: byte-stable round trip and damage detection") {
    auto cfg = distiller::DistillerConfig::for_mode(Mode::monolingual, 16, 4);
    cfg.seed = 9;
    const auto model = distiller::DistillerModel<float>::init(cfg);
    distiller::CheckpointMeta meta;
    meta.step = 12;
    meta.best_val_loss = 0.5;
    const auto bytes = distiller::encode_checkpoint(model, meta);
    const auto back = distiller::decode_checkpoint(bytes);
    CHECK(back.meta == meta);
    CHECK(back.model.config == model.config);
    CHECK(back.model.meaning.wq == model.meaning.wq);
    CHECK(back.model.layer_pos == model.layer_pos);
    CHECK(distiller::encode_checkpoint(back.model, back.meta) == bytes);

    CHECK_THROWS_AS(distiller::decode_checkpoint("NOPE" + bytes.substr(4)), FormatError);
    CHECK_THROWS_AS(distiller::decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
    CHECK_THROWS_AS(distiller::decode_checkpoint(bytes.substr(0, 20)), FormatError);
  }
}

TEST_SUITE("objective") {
  TEST_CASE("reconstruction loss") {
    const std::vector<double> y{1, 0, 0, 0}, z{0, 0, 0, 0}, w{0.3, -1, 2, 5};
    CHECK(objective::recon_loss<double>(w, w) == 0.0);
    CHECK(objective::recon_loss<double>(y, z) == 0.25);
    CHECK(objective::recon_loss<double>(y, w) == objective::recon_loss<double>(w, y));
  }

  TEST_CASE("everything equal gives zero in both modes") {
    const std::vector<double> v{0.5, -1, 2};
    Reps r;
    for (auto* s : {&r.original, &r.positive, &r.negative}) s->target = s->distilled.meaning = s->distilled.context = v;
    r.mode = Mode::monolingual;
    CHECK(objective::cross_loss_mono(r) == 0.0);
    CHECK(objective::total_loss(r).total() == 0.0);
    r.mode = Mode::crosslingual;
    CHECK(objective::cross_loss_xl(r) == 0.0);
    CHECK(objective::total_loss(r).total() == 0.0);
  }

  TEST_CASE("hand-built monolingual instance") {
    Reps r;
    r.mode = Mode::monolingual;
    r.original.target = {0, 0};
    r.original.distilled = {{2, 0}, {0, 0}};
    r.positive.target = {1, 1};
    r.positive.distilled = {{0, 0}, {0, 2}};
    r.negative.target = {1, 0};
    r.negative.distilled = {{2, 0}, {-2, 0}};
    CHECK(objective::cross_loss_mono(r) == 0.0);
    r.positive.distilled.context = {0, 4};  // first term now ((1-1)^2 + (2-1)^2) / 2
    CHECK(objective::cross_loss_mono(r) == doctest::Approx(0.5));
  }

  TEST_CASE("random triples match the scalar oracle; modes differ") {
    Rng rng(10);
    for (int i = 0; i < 50; ++i) {
      auto r = random_reps(rng, 1 + i % 9, Mode::monolingual);
      CHECK(objective::cross_loss_mono(r) == doctest::Approx(oracle::cross_mono(r)).epsilon(1e-12));
      const auto br = objective::total_loss(r);
      CHECK(br.total() == doctest::Approx(oracle::total(r)).epsilon(1e-12));
      CHECK(br.total() == br.reconstruction + br.cross);
      r.mode = Mode::crosslingual;
      CHECK(objective::cross_loss_xl(r) == doctest::Approx(oracle::cross_xl(r)).epsilon(1e-12));
      CHECK(objective::cross_loss_xl(r) != objective::cross_loss_mono(Reps{r.original, r.positive, r.negative,
                                                                           Mode::monolingual, true}));
    }
  }

  TEST_CASE("wrong variant or disabled negatives are refused") {
    Rng rng(11);
    auto r = random_reps(rng, 3, Mode::crosslingual);
    CHECK_THROWS_AS(objective::cross_loss_mono(r), ConfigError);
    r.mode = Mode::monolingual;
    CHECK_THROWS_AS(objective::cross_loss_xl(r), ConfigError);
    r.use_negatives = false;
    CHECK_THROWS_AS(objective::cross_loss_mono(r), ConfigError);
  }

  TEST_CASE("without negatives nothing depends on the negative sample") {
    Rng rng(12);
    for (Mode mode : {Mode::monolingual, Mode::crosslingual}) {
      auto r = random_reps(rng, 5, mode);
      r.use_negatives = false;
      auto g1 = objective::TripleGradients<double>::zeros(5);
      const double a = objective::total_loss(r, &g1).total();
      r.negative = random_reps(rng, 5, mode).negative;
      auto g2 = objective::TripleGradients<double>::zeros(5);
      CHECK(objective::total_loss(r, &g2).total() == a);
      for (double v : g1.negative.meaning) CHECK(v == 0.0);
      for (double v : g1.negative.context) CHECK(v == 0.0);
      CHECK(g1.original.meaning == g2.original.meaning);
    }
  }

  TEST_CASE("loss gradients match central differences") {
    Rng rng(13);
    for (Mode mode : {Mode::monolingual, Mode::crosslingual}) {
      for (bool neg : {true, false}) {
        auto r = random_reps(rng, 4, mode);
        r.use_negatives = neg;
        auto g = objective::TripleGradients<double>::zeros(4);
        objective::total_loss(r, &g);
        auto vecs = all_vectors(r);
        auto grads = all_grads(g);
        for (std::size_t k = 0; k < vecs.size(); ++k)
          for (std::size_t j = 0; j < 4; ++j) {
            const double keep = (*vecs[k])[j];
            (*vecs[k])[j] = keep + 1e-5;
            const double up = objective::total_loss(r).total();
            (*vecs[k])[j] = keep - 1e-5;
            const double down = objective::total_loss(r).total();
            (*vecs[k])[j] = keep;
            CHECK((*grads[k])[j] == doctest::Approx((up - down) / 2e-5).epsilon(1e-7));
          }
      }
    }
  }
}
