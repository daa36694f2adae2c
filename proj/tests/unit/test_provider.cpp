#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "wic/provider/hsx1.hpp"
#include "wic/provider/toy_mlm.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"

using namespace wic;
using namespace wic::provider;

namespace {

ToyMLMConfig small_config(std::uint64_t seed = 1) {
  ToyMLMConfig c;
  c.seed = seed;
  c.vocab = build_vocabulary({{"the", "river", "bank", "was", "muddy", "extraordinary", "."}}, c.subword_chunk);
  return c;
}

const std::vector<std::string> kSentence = {"the", "river", "bank", "was", "extraordinary", "."};

HiddenStack hand_stack(Rng& rng, std::size_t n, std::size_t layers, std::size_t dim) {
  HiddenStack s;
  s.sentence_id = "hand";
  for (std::size_t i = 0; i < n; ++i) s.subword_tokens.push_back("w" + std::to_string(i));
  s.special_mask.assign(n, 0);
  s.layers = layers;
  s.dim = dim;
  const auto v = testutil::random_doubles(rng, n * layers * dim);
  s.values.assign(v.begin(), v.end());
  return s;
}

}  // namespace

TEST_SUITE("provider") {
  TEST_CASE("subword chunking") {
    CHECK(chunk_word("extraordinary", 6) == std::vector<std::string>{"extrao", "##rdinar", "##y"});
    CHECK(chunk_word("bank", 6) == std::vector<std::string>{"bank"});
    CHECK(chunk_word("ééééééé", 6) == std::vector<std::string>{"éééééé", "##é"});
  }

  TEST_CASE("toy encode: deterministic, right shape, seed-sensitive") {
    const ToyMLM a(small_config(1)), b(small_config(1)), c(small_config(2));
    const auto x = a.encode_words(kSentence, Span{2, 3});
    CHECK(x == a.encode_words(kSentence, Span{2, 3}));
    CHECK(x == b.encode_words(kSentence, Span{2, 3}));
    CHECK(x.layers == 5);
    CHECK(x.dim == 16);
    CHECK(x.values.size() == x.num_subwords() * 5 * 16);
    CHECK(x.values != c.encode_words(kSentence, Span{2, 3}).values);
    x.validate();
    // [CLS] the river bank was extrao ##rdina ##ry . [SEP]
    CHECK(x.num_subwords() == 10);
    CHECK(x.special_mask.front() == 1);
    CHECK(x.special_mask.back() == 1);
    REQUIRE(x.target_span);
    CHECK(*x.target_span == Span{3, 4});
    CHECK(a.encode_words(kSentence, Span{4, 5}).target_span == Span{5, 8});
  }

  TEST_CASE("toy encode free functions match the class") {
    const auto cfg = small_config(3);
    CHECK(toy_mlm_encode(kSentence, cfg) == ToyMLM(cfg).encode_words(kSentence));
  }

  TEST_CASE("masked prediction: normalised, sorted, top-1 from an independent logit loop") {
    const ToyMLM m(small_config(4));
    for (std::size_t pos = 0; pos < kSentence.size(); ++pos) {
      const auto p = m.predict_masked(kSentence, pos);
      REQUIRE(p.tokens.size() == p.probs.size());
      CHECK(p.vocab_size == m.config().vocab.size());
      double s = 0;
      for (std::size_t i = 0; i < p.probs.size(); ++i) {
        s += p.probs[i];
        if (i) CHECK(p.probs[i - 1] >= p.probs[i]);
      }
      CHECK(std::abs(s - 1) < 1e-6);

      auto masked = kSentence;
      masked[pos] = kMaskToken;
      const auto st = m.encode_words(masked);
      const auto h = st.at(p.position, m.num_hidden_layers());
      std::size_t best = 0;
      double best_logit = -1e300;
      for (std::size_t t = 0; t < m.config().vocab.size(); ++t) {
        double l = 0;
        for (std::size_t j = 0; j < m.dim(); ++j) l += double(h[j]) * m.token_embeddings()(t, j);
        if (l > best_logit) best_logit = l, best = t;
      }
      CHECK(p.tokens.front() == m.config().vocab[best]);
    }
    CHECK_THROWS_AS(m.predict_masked(kSentence, 99), PreconditionError);
  }

  TEST_CASE("subword pooling") {
    Rng rng(5);
    const auto st = hand_stack(rng, 4, 3, 2);
    const auto one = pool_subwords(st, Span{1, 2});
    for (std::size_t l = 0; l < 3; ++l)
      for (std::size_t j = 0; j < 2; ++j) CHECK(one(l, j) == st.at(1, l)[j]);

    HiddenStack two = st;
    two.at(0, 0)[0] = 1;
    two.at(0, 0)[1] = 3;
    two.at(1, 0)[0] = 3;
    two.at(1, 0)[1] = 5;
    const auto m = pool_subwords(two, Span{0, 2});
    CHECK(m(0, 0) == 2.0f);
    CHECK(m(0, 1) == 4.0f);

    const auto all = pool_subwords(st, Span{0, 4});
    for (std::size_t l = 0; l < 3; ++l)
      for (std::size_t j = 0; j < 2; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < 4; ++i) s += st.at(i, l)[j];
        CHECK(all(l, j) == doctest::Approx(s / 4).epsilon(1e-6));
      }
    CHECK_THROWS(pool_subwords(st, Span{2, 2}));
    CHECK_THROWS(pool_subwords(st, Span{3, 5}));
    CHECK_THROWS_AS(pool_target_subwords(st), PreconditionError);
  }

  TEST_CASE("top-half layer selection") {
    CHECK(top_half_start(24) == 13);
    CHECK(top_half_start(4) == 3);
    CHECK(top_half_start(12) == 7);
    CHECK_THROWS_AS(top_half_start(5), ConfigError);
    nn::Tensor2D<float> h(25, 1);
    for (std::size_t i = 0; i < 25; ++i) h(i, 0) = float(i);
    const auto top = select_top_layers(h, 24);
    REQUIRE(top.rows() == 12);
    CHECK(top(0, 0) == 13.0f);
    CHECK(top(11, 0) == 24.0f);
  }

  TEST_CASE("word spans follow continuation pieces and skip markers") {
    const ToyMLM m(small_config());
    const auto spans = word_spans(m.encode_words(kSentence));
    REQUIRE(spans.size() == kSentence.size());
    CHECK(spans[0] == Span{1, 2});
    CHECK(spans[4] == Span{5, 8});
    CHECK(spans[5] == Span{8, 9});
  }

  TEST_CASE("HSX1 round trip, truncation and empty input") {
    testutil::TempDir dir("hsx1");
    const ToyMLM m(small_config());
    std::vector<HiddenStack> stacks = {m.encode(std::string("a"), kSentence, Span{1, 2}),
                                       m.encode(std::string("b"), {"the", "bank"}, std::nullopt)};
    CHECK(stacks[0].sentence_id == "a");
    write_hidden_states(dir / "x.meta", dir / "x.bin", stacks);
    CHECK(load_hidden_states(dir / "x.meta", dir / "x.bin") == stacks);
    CHECK(io::read_file(dir / "x.bin").substr(0, 4) == "HSX1");

    FileProvider fp(dir / "x.meta", dir / "x.bin");
    CHECK(fp.size() == 2);
    CHECK(fp.num_hidden_layers() == 4);
    CHECK(fp.encode("b", {}, std::nullopt) == stacks[1]);
    CHECK_THROWS_AS(fp.encode("zzz", {}, std::nullopt), PreconditionError);
    CHECK_THROWS_AS(fp.encode("b", {}, Span{0, 1}), PreconditionError);

    const auto bin = io::read_file(dir / "x.bin");
    io::write_file_atomic(dir / "t.bin", bin.substr(0, bin.size() - 7));
    Hsx1Reader r(dir / "x.meta", dir / "t.bin");
    const auto first = r.next();
    REQUIRE(first);
    CHECK(*first == stacks[0]);
    CHECK_THROWS_AS(r.next(), FormatError);

    io::write_file_atomic(dir / "e.meta", "");
    io::write_file_atomic(dir / "e.bin", std::string("HSX1\x01", 5));
    Hsx1Reader empty(dir / "e.meta", dir / "e.bin");
    CHECK_FALSE(empty.next());
  }

  TEST_CASE("HSX1 rejects a bad magic") {
    testutil::TempDir dir("hsx1-magic");
    io::write_file_atomic(dir / "m", "");
    io::write_file_atomic(dir / "b", "HSX9\x01");
    CHECK_THROWS_AS(Hsx1Reader(dir / "m", dir / "b"), FormatError);
  }

  TEST_CASE("fingerprint tracks parameters, not calls") {
    const ToyMLM a(small_config(1));
    const auto before = a.fingerprint();
    (void)a.encode_words(kSentence);
    (void)a.predict_masked(kSentence, 1);
    CHECK(a.fingerprint() == before);
    CHECK(ToyMLM(small_config(2)).fingerprint() != before);
  }
}
